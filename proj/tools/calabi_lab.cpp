// Batch runner for the Calabi flow experiments.
//
//   calabi_lab flow --N 64 --t-end 0.02 --out runs/flow
//   calabi_lab energies --set m=16 --N 128
//   calabi_lab bounds --set M=1 --set C0=1 --set CE=1 --set n=2

#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "calabi/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> overrides;
  bool print_config = false;
};

void add_common(CLI::App& sub, Flags& flags) {
  sub.add_option("--config", flags.config, "flat key = value configuration file");
  auto forward = [&flags](const char* key) {
    return [&flags, key](const std::string& value) { flags.overrides.emplace_back(key, value); };
  };
  sub.add_option_function<std::string>("--out", forward("out"), "output directory");
  sub.add_option_function<std::string>("--N", forward("N"), "points per axis (power of two, >= 8)");
  sub.add_option_function<std::string>("--dim", forward("dim"), "dimension (1 or 2)");
  sub.add_option_function<std::string>("--t-end", forward("t_end"), "final time");
  sub.add_option_function<std::string>("--sigma", forward("sigma"), "dt = sigma h^4");
  sub.add_option_function<std::string>("--lambda", forward("lambda"), "curvature bound threshold");
  sub.add_option_function<std::string>("--initial", forward("initial"),
                                        "flat, cosine, quartic-example, or a snapshot path");
  sub.add_option("--set", flags.sets, "additional key=value override (repeatable)");
  sub.add_flag("--print-config", flags.print_config, "print the resolved configuration and exit");
}

const std::map<std::string, std::string> kDescriptions = {
    {"flow", "run the flow and write the monitor log and snapshots"},
    {"energies", "energies along the approximation sequence of a weak potential"},
    {"legendre", "Legendre round trip errors for N = 8 up to the configured N"},
    {"mollify", "mollify the initial data at width h"},
    {"bounds", "constants ledger for the curvature bound"},
    {"smooth-quartic", "flows started from the quartic approximations listed in m_list"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for the Calabi flow on tori"};
  app.set_version_flag("--version", CALABI_VERSION);
  app.require_subcommand(1);

  Flags flags;
  for (const auto& name : calabi::experiment_names()) {
    const auto it = kDescriptions.find(name);
    add_common(*app.add_subcommand(name, it == kDescriptions.end() ? "" : it->second), flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(calabi::ExitStatus::kConfigError);
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    for (const auto& s : flags.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw calabi::ConfigError("--set", "expected key=value, got '" + s + "'");
      flags.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    std::optional<std::filesystem::path> path;
    if (!flags.config.empty()) path = flags.config;
    const auto config = calabi::parse_config(path, flags.overrides, experiment);
    if (flags.print_config) {
      std::fputs(calabi::to_config_text(config).c_str(), stdout);
      return 0;
    }
    const auto status = calabi::run_experiment(config);
    if (experiment == "bounds") {
      const auto ledger = calabi::constants(config.special);
      std::fputs(calabi::ledger_text(config.special, ledger).c_str(), stdout);
      std::printf("%s\n%s\n", calabi::ledger_csv_header().c_str(),
                  calabi::ledger_csv_row(config.special, ledger).c_str());
    }
    if (status == calabi::ExitStatus::kTerminal) {
      std::fprintf(stderr, "calabi_lab: flow ended in a terminal state; see %s\n", config.out.string().c_str());
    }
    return static_cast<int>(status);
  } catch (const calabi::ConfigError& e) {
    std::fprintf(stderr, "calabi_lab: config error: %s\n", e.what());
    return static_cast<int>(calabi::ExitStatus::kConfigError);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "calabi_lab: %s\n", e.what());
    return static_cast<int>(calabi::ExitStatus::kTerminal);
  }
}
