#include "calabi/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "calabi/geometry.hpp"
#include "calabi/potential.hpp"
#include "calabi/snapshot.hpp"
#include "calabi/weak.hpp"
#include "json.hpp"

namespace calabi {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "cannot parse '" + text + "' as a number");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key, "expected a boolean, got '" + text + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shortest text that round-trips.
std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool is_builtin(const std::string& name) {
  return name == "flat" || name == "cosine" || name == "quartic-example";
}

std::string integrator_name(Integrator integrator) {
  return integrator == Integrator::kEtdRk4 ? "etdrk4" : "rk4";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

std::string snapshot_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "u_%08ld.fld", step);
  return buf;
}

ScalarField cosine_field(const PeriodicGrid& grid, double amplitude) {
  const int dim = grid.dim();
  return sample(
      [amplitude, dim](const Point& x) {
        double v = 0.0;
        for (int a = 0; a < dim; ++a) v += std::cos(std::numbers::pi * x[a]);
        return amplitude * v;
      },
      grid);
}

/// Everything an experiment needs about its initial data.
struct InitialData {
  std::string name;
  std::optional<std::string> kind;  // snapshot kind, or "weak" for quartic-example
  ScalarField field;
  std::optional<WeakInput> weak;
};

InitialData load_initial(const ExperimentConfig& config) {
  const std::string name = config.resolved_initial();
  if (is_builtin(name)) {
    const PeriodicGrid grid(config.dim, config.N);
    if (name == "flat") return {name, "symplectic", ScalarField::zeros(grid), std::nullopt};
    if (name == "cosine") return {name, "symplectic", cosine_field(grid, config.amplitude), std::nullopt};
    WeakInput weak = quartic_example(grid);
    ScalarField f = weak.f;
    return {name, "weak", std::move(f), std::move(weak)};
  }
  Snapshot snap = read_snapshot(name);
  if (snap.kind == "weak") {
    WeakInput weak = weak_from_field(snap.field);
    return {name, snap.kind, std::move(snap.field), std::move(weak)};
  }
  return {name, snap.kind, std::move(snap.field), std::nullopt};
}

ApproxSchedule make_schedule(const ExperimentConfig& config, const WeakInput& weak, int m_max) {
  return config.schedule == "search" ? choose_schedule(weak, m_max) : ApproxSchedule::identity(m_max);
}

SymplecticPotential initial_potential(const ExperimentConfig& config, const InitialData& data) {
  if (data.weak) return approx_potential(data.weak->f, config.m, make_schedule(config, *data.weak, config.m));
  if (data.kind == "kahler") return legendre_transform(KahlerPotential{data.field});
  return SymplecticPotential{data.field};
}

FlowConfig effective_flow(const ExperimentConfig& config) {
  FlowConfig flow = config.flow;
  if (!config.lambda_set) flow.lambda = constants(config.special).lambda;
  return flow;
}

Json grid_json(const PeriodicGrid& grid) {
  return Json{{"dim", grid.dim()}, {"N", grid.points_per_axis()}, {"half_length", grid.half_length()},
              {"spacing", grid.spacing()}};
}

Json config_json(const ExperimentConfig& config) {
  Json j;
  std::stringstream ss(to_config_text(config));
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    j[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return j;
}

Json ledger_json(const ConstantsLedger& l) {
  return Json{{"C1", l.C1}, {"C2", l.C2}, {"C3", l.C3}, {"R0", l.R0}, {"exponent", l.exponent},
              {"max_radius", l.max_radius}, {"lambda", l.lambda}, {"sphere_area", l.sphere_area}};
}

void write_metadata(const ExperimentConfig& config, Json extra) {
  Json meta;
  meta["version"] = CALABI_VERSION;
  meta["experiment"] = config.experiment;
  meta["config"] = config_json(config);
  for (auto& [key, value] : extra.items()) meta[key] = value;
  write_text(config.out / "metadata.json", meta.dump(2) + "\n");
}

Json flow_summary(const FlowConfig& flow, const PeriodicGrid& grid, const RunResult& result) {
  return Json{{"base_dt", flow.base_dt(grid)},
              {"lambda", flow.lambda},
              {"integrator", integrator_name(flow.integrator)},
              {"status", to_string(result.state.status)},
              {"message", result.state.message},
              {"final_t", result.state.t},
              {"steps", result.state.step_count},
              {"rows", result.log.rows.size()}};
}

RunResult flow_with_snapshots(const SymplecticPotential& pot, const FlowConfig& flow, const fs::path& dir,
                              bool snapshots) {
  MonitorObserver observer;
  if (snapshots) {
    fs::create_directories(dir);
    observer = [&dir](const FlowState& state, const MonitorRow&) {
      write_snapshot(dir / snapshot_name(state.step_count), state.pot.periodic, "symplectic");
    };
  }
  return run(pot, flow, observer);
}

ExitStatus run_flow(const ExperimentConfig& config) {
  const InitialData data = load_initial(config);
  const SymplecticPotential pot = initial_potential(config, data);
  const FlowConfig flow = effective_flow(config);
  const RunResult result = flow_with_snapshots(pot, flow, config.out / "snapshots", config.snapshots);
  write_text(config.out / "monitor.csv", result.log.to_csv());
  Json extra;
  extra["grid"] = grid_json(pot.grid());
  extra["flow"] = flow_summary(flow, pot.grid(), result);
  extra["ledger"] = ledger_json(constants(config.special));
  write_metadata(config, std::move(extra));
  return result.state.terminal() ? ExitStatus::kTerminal : ExitStatus::kCompleted;
}

std::string energies_header() {
  return "m,r,resolved,mismatch,calabi_energy,mabuchi_energy,total_energy,max_rm,max_grad";
}

std::string energies_row(int m, int r, bool resolved, double mismatch, const CurvatureReport& rep) {
  return std::to_string(m) + "," + std::to_string(r) + "," + (resolved ? "1" : "0") + "," + fmt(mismatch) +
         "," + fmt(rep.calabi_energy) + "," + fmt(rep.mabuchi_energy) + "," + fmt(rep.total_energy) + "," +
         fmt(rep.max_rm) + "," + fmt(rep.max_grad);
}

ExitStatus run_energies(const ExperimentConfig& config) {
  const InitialData data = load_initial(config);
  std::string csv = energies_header() + "\n";
  Json extra;
  extra["grid"] = grid_json(data.field.grid());
  if (data.weak) {
    const ApproxSchedule schedule = make_schedule(config, *data.weak, config.m);
    Json sched = Json::array();
    for (int m = 1; m <= config.m; ++m) {
      const auto pot = approx_potential(data.weak->f, m, schedule);
      csv += energies_row(m, schedule.at(m), schedule.resolved[m - 1], schedule.mismatch[m - 1], energies(pot)) +
             "\n";
      sched.push_back(schedule.at(m));
    }
    extra["schedule"] = config.schedule;
    extra["r"] = sched;
    extra["hessian_source"] = data.weak->hessian_source;
  } else {
    csv += energies_row(0, 0, true, std::nan(""), energies(initial_potential(config, data))) + "\n";
  }
  write_text(config.out / "energies.csv", csv);
  write_metadata(config, std::move(extra));
  return ExitStatus::kCompleted;
}

ExitStatus run_legendre(const ExperimentConfig& config) {
  const std::string name = config.resolved_initial();
  std::string csv = "N,roundtrip_error,min_convexity\n";
  Json extra;
  Json errors = Json::array();
  std::optional<ScalarField> top_u, top_back;
  std::vector<int> sizes;
  if (is_builtin(name)) {
    for (int n = 8; n <= config.N; n *= 2) sizes.push_back(n);
  } else {
    sizes.push_back(-1);
  }
  for (int n : sizes) {
    ScalarField phi = n > 0 ? cosine_field(PeriodicGrid(config.dim, n), config.amplitude)
                            : read_snapshot(name).field;
    if (name == "flat" && n > 0) phi = ScalarField::zeros(phi.grid());
    const KahlerPotential psi{mean_zero(phi)};
    const SymplecticPotential u = legendre_transform(psi);
    const KahlerPotential back = legendre_transform(u);
    const double err = (back.periodic - psi.periodic).max_abs();
    csv += std::to_string(psi.grid().points_per_axis()) + "," + fmt(err) + "," + fmt(convexity_margin(u)) + "\n";
    errors.push_back(err);
    top_u = u.periodic;
    top_back = back.periodic;
  }
  write_text(config.out / "legendre.csv", csv);
  if (config.snapshots && top_u) {
    fs::create_directories(config.out / "snapshots");
    write_snapshot(config.out / "snapshots" / "symplectic.fld", *top_u, "symplectic");
    write_snapshot(config.out / "snapshots" / "roundtrip.fld", *top_back, "kahler");
  }
  extra["roundtrip_errors"] = errors;
  write_metadata(config, std::move(extra));
  return ExitStatus::kCompleted;
}

ExitStatus run_mollify(const ExperimentConfig& config) {
  const InitialData data = load_initial(config);
  const ScalarField smooth = mollify(data.field, MollifierSpec{config.h});
  const SymplecticPotential before{data.field};
  const SymplecticPotential after{smooth};
  std::string csv = "h,sup_change,convexity_before,convexity_after\n";
  csv += fmt(config.h) + "," + fmt((smooth - data.field).max_abs()) + "," + fmt(convexity_margin(before)) + "," +
         fmt(convexity_margin(after)) + "\n";
  write_text(config.out / "mollify.csv", csv);
  if (config.snapshots) {
    fs::create_directories(config.out / "snapshots");
    write_snapshot(config.out / "snapshots" / "input.fld", data.field, data.kind);
    write_snapshot(config.out / "snapshots" / "mollified.fld", smooth, "symplectic");
  }
  Json extra;
  extra["grid"] = grid_json(data.field.grid());
  write_metadata(config, std::move(extra));
  return ExitStatus::kCompleted;
}

ExitStatus run_bounds(const ExperimentConfig& config) {
  const ConstantsLedger ledger = constants(config.special);
  write_text(config.out / "ledger.csv", ledger_csv_header() + "\n" + ledger_csv_row(config.special, ledger) + "\n");
  write_text(config.out / "ledger.txt", ledger_text(config.special, ledger));
  Json extra;
  extra["ledger"] = ledger_json(ledger);
  write_metadata(config, std::move(extra));
  return ExitStatus::kCompleted;
}

ExitStatus run_smooth_quartic(const ExperimentConfig& config) {
  const PeriodicGrid grid(config.dim, config.N);
  const WeakInput weak = quartic_example(grid);
  const int m_max = *std::max_element(config.m_list.begin(), config.m_list.end());
  const ApproxSchedule schedule = make_schedule(config, weak, m_max);
  const FlowConfig flow = effective_flow(config);

  std::string combined = "m,row,t,calabi,t_calabi\n";
  Json runs = Json::array();
  bool terminal = false;
  for (int m : config.m_list) {
    const auto pot = approx_potential(weak.f, m, schedule);
    const std::string tag = "m" + std::to_string(m);
    const RunResult result = flow_with_snapshots(pot, flow, config.out / "snapshots" / tag, config.snapshots);
    write_text(config.out / ("monitor_" + tag + ".csv"), result.log.to_csv());
    for (std::size_t i = 0; i < result.log.rows.size(); ++i) {
      const auto& row = result.log.rows[i];
      combined += std::to_string(m) + "," + std::to_string(i) + "," + fmt(row.t) + "," + fmt(row.calabi) + "," +
                  fmt(row.t * row.calabi) + "\n";
    }
    Json summary = flow_summary(flow, grid, result);
    summary["m"] = m;
    summary["r"] = schedule.at(m);
    runs.push_back(std::move(summary));
    terminal = terminal || result.state.terminal();
  }
  write_text(config.out / "smooth_quartic.csv", combined);
  Json extra;
  extra["grid"] = grid_json(grid);
  extra["runs"] = runs;
  write_metadata(config, std::move(extra));
  return terminal ? ExitStatus::kTerminal : ExitStatus::kCompleted;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (std::find(experiment_names().begin(), experiment_names().end(), experiment) == experiment_names().end()) {
    throw ConfigError("experiment", "unknown experiment '" + experiment + "'");
  }
  try {
    PeriodicGrid grid(dim, N);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(dim == 1 || dim == 2 ? "N" : "dim", e.what());
  }
  try {
    flow.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("flow", e.what());
  }
  try {
    MollifierSpec{h}.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("h", e.what());
  }
  try {
    special.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("special", e.what());
  }
  if (!std::isfinite(amplitude)) throw ConfigError("amplitude", "must be finite");
  if (m < 1) throw ConfigError("m", "must be >= 1");
  for (int v : m_list) {
    if (v < 1) throw ConfigError("m_list", "entries must be >= 1");
  }
  if (schedule != "identity" && schedule != "search") {
    throw ConfigError("schedule", "expected identity or search, got '" + schedule + "'");
  }
  const std::string init = resolved_initial();
  if (!is_builtin(init) && !fs::exists(init)) throw ConfigError("initial", "file not found: " + init);
  if (out.empty()) throw ConfigError("out", "output directory must be set");
}

std::string ExperimentConfig::resolved_initial() const {
  if (!initial.empty()) return initial;
  if (experiment == "flow" || experiment == "legendre") return "cosine";
  return "quartic-example";
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "experiment") c.experiment = v;
  else if (key == "N") c.N = parse_number<int>(key, v);
  else if (key == "dim") c.dim = parse_number<int>(key, v);
  else if (key == "initial") c.initial = v;
  else if (key == "amplitude") c.amplitude = parse_number<double>(key, v);
  else if (key == "sigma") c.flow.dt_safety = parse_number<double>(key, v);
  else if (key == "t_end") c.flow.t_end = parse_number<double>(key, v);
  else if (key == "monitor_every") c.flow.monitor_every = parse_number<int>(key, v);
  else if (key == "lambda") {
    c.flow.lambda = parse_number<double>(key, v);
    c.lambda_set = true;
  } else if (key == "adaptive") c.flow.adaptive = parse_bool(key, v);
  else if (key == "integrator") {
    if (v == "etdrk4") c.flow.integrator = Integrator::kEtdRk4;
    else if (v == "rk4") c.flow.integrator = Integrator::kRk4;
    else throw ConfigError(key, "expected etdrk4 or rk4, got '" + v + "'");
  } else if (key == "h") c.h = parse_number<double>(key, v);
  else if (key == "m") c.m = parse_number<int>(key, v);
  else if (key == "schedule") c.schedule = v;
  else if (key == "m_list") c.m_list = parse_int_list(key, v);
  else if (key == "M") c.special.M = parse_number<double>(key, v);
  else if (key == "C0") c.special.C0 = parse_number<double>(key, v);
  else if (key == "CE") c.special.CE = parse_number<double>(key, v);
  else if (key == "n") c.special.n = parse_number<int>(key, v);
  else if (key == "out") c.out = v;
  else if (key == "snapshots") c.snapshots = parse_bool(key, v);
  else throw ConfigError(key, "unknown key");

  // Range checks that would otherwise surface under a generic field name.
  if (key == "sigma" && !(c.flow.dt_safety > 0.0)) throw ConfigError(key, "must be positive");
  if (key == "t_end" && !(c.flow.t_end > 0.0)) throw ConfigError(key, "must be positive");
  if (key == "monitor_every" && c.flow.monitor_every < 1) throw ConfigError(key, "must be >= 1");
  if (key == "lambda" && !(c.flow.lambda > 0.0)) throw ConfigError(key, "must be positive");
  if ((key == "M" || key == "C0" || key == "CE") && !(parse_number<double>(key, v) > 0.0)) {
    throw ConfigError(key, "must be positive");
  }
  if (key == "n" && c.special.n < 1) throw ConfigError(key, "must be >= 1");
}

ExperimentConfig parse_config(const std::optional<fs::path>& path,
                              const std::vector<std::pair<std::string, std::string>>& overrides,
                              const std::string& experiment) {
  ExperimentConfig config;
  if (!experiment.empty()) config.experiment = experiment;
  if (path && !path->empty()) {
    std::ifstream is(*path);
    if (!is) throw ConfigError("config", "cannot read " + path->string());
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config", path->string() + ":" + std::to_string(lineno) + ": expected key = value");
      }
      apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    if (!experiment.empty() && config.experiment != experiment) {
      throw ConfigError("experiment", "file selects '" + config.experiment + "' but '" + experiment +
                                          "' was requested");
    }
  }
  for (const auto& [key, value] : overrides) apply_setting(config, key, value);
  config.validate();
  return config;
}

std::string to_config_text(const ExperimentConfig& c) {
  std::string list;
  for (std::size_t i = 0; i < c.m_list.size(); ++i) list += (i ? "," : "") + std::to_string(c.m_list[i]);
  std::string text;
  auto add = [&text](const std::string& key, const std::string& value) { text += key + " = " + value + "\n"; };
  add("experiment", c.experiment);
  add("N", std::to_string(c.N));
  add("dim", std::to_string(c.dim));
  add("initial", c.resolved_initial());
  add("amplitude", shortest(c.amplitude));
  add("sigma", shortest(c.flow.dt_safety));
  add("t_end", shortest(c.flow.t_end));
  add("monitor_every", std::to_string(c.flow.monitor_every));
  if (c.lambda_set) add("lambda", shortest(c.flow.lambda));
  add("adaptive", c.flow.adaptive ? "true" : "false");
  add("integrator", integrator_name(c.flow.integrator));
  add("h", shortest(c.h));
  add("m", std::to_string(c.m));
  add("schedule", c.schedule);
  add("m_list", list);
  add("M", shortest(c.special.M));
  add("C0", shortest(c.special.C0));
  add("CE", shortest(c.special.CE));
  add("n", std::to_string(c.special.n));
  add("out", c.out.string());
  add("snapshots", c.snapshots ? "true" : "false");
  return text;
}

ExitStatus run_experiment(const ExperimentConfig& config) {
  config.validate();
  fs::create_directories(config.out);
  if (config.experiment == "flow") return run_flow(config);
  if (config.experiment == "energies") return run_energies(config);
  if (config.experiment == "legendre") return run_legendre(config);
  if (config.experiment == "mollify") return run_mollify(config);
  if (config.experiment == "bounds") return run_bounds(config);
  return run_smooth_quartic(config);
}

}  // namespace calabi
