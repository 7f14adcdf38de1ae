#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "calabi/experiment.hpp"
#include "calabi/snapshot.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace calabi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "calabi_experiment_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CALABI_LAB_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("defaults") {
    const auto c = parse_config(std::nullopt);
    CHECK(c.experiment == "flow");
    CHECK(c.N == 64);
    CHECK(c.dim == 2);
    CHECK(c.resolved_initial() == "cosine");
    CHECK(c.flow.dt_safety == 0.5);
    CHECK(c.flow.t_end == 0.02);
    CHECK(c.h == 0.1);
    CHECK(c.m == 16);
    CHECK(c.special.M == 1.0);
    CHECK(parse_config(std::nullopt, {}, "energies").resolved_initial() == "quartic-example");
  }

  TEST_CASE("invalid settings name the field") {
    auto field_of = [](const std::vector<std::pair<std::string, std::string>>& o) {
      try {
        parse_config(std::nullopt, o);
      } catch (const ConfigError& e) {
        return e.field();
      }
      return std::string("none");
    };
    CHECK(field_of({{"N", "12"}}) == "N");
    CHECK(field_of({{"N", "abc"}}) == "N");
    CHECK(field_of({{"dim", "3"}}) == "dim");
    CHECK(field_of({{"h", "0.7"}}) == "h");
    CHECK(field_of({{"bogus", "1"}}) == "bogus");
    CHECK(field_of({{"initial", "/nonexistent/file.fld"}}) == "initial");
    CHECK(field_of({{"N", "32"}}) == "none");
    try {
      parse_config(std::nullopt, {{"h", "0.7"}});
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("h <= 0.5") != std::string::npos);
    }
  }

  TEST_CASE("config file and text round trip") {
    const auto dir = scratch("config");
    std::ofstream(dir / "run.cfg") << "# comment\nexperiment = mollify\nN = 32\nh = 0.25 # trailing\nm_list = 1,3\n";
    const auto c = parse_config(dir / "run.cfg", {{"N", "16"}});
    CHECK(c.experiment == "mollify");
    CHECK(c.N == 16);
    CHECK(c.h == 0.25);
    CHECK(c.m_list == std::vector<int>{1, 3});
    std::ofstream(dir / "again.cfg") << to_config_text(c);
    const auto d = parse_config(dir / "again.cfg");
    CHECK(to_config_text(d) == to_config_text(c));
  }

  TEST_CASE("bounds writes the ledger") {
    const auto dir = scratch("bounds");
    const auto c = parse_config(std::nullopt, {{"out", dir.string()}}, "bounds");
    CHECK(run_experiment(c) == ExitStatus::kCompleted);
    const auto ledger = constants(c.special);
    CHECK(slurp(dir / "ledger.csv") == ledger_csv_header() + "\n" + ledger_csv_row(c.special, ledger) + "\n");
    const auto meta = nlohmann::json::parse(slurp(dir / "metadata.json"));
    CHECK(meta["experiment"] == "bounds");
    CHECK(meta["ledger"]["C3"].get<double>() == 81.0);
  }

  TEST_CASE("flat flow gives zero columns") {
    const auto dir = scratch("flat");
    const auto c = parse_config(std::nullopt,
                                {{"out", dir.string()}, {"initial", "flat"}, {"N", "16"}, {"t_end", "1e-3"},
                                 {"monitor_every", "50"}});
    CHECK(run_experiment(c) == ExitStatus::kCompleted);
    std::ifstream is(dir / "monitor.csv");
    std::string line;
    std::getline(is, line);
    CHECK(line == MonitorLog::csv_header());
    int rows = 0;
    while (std::getline(is, line)) {
      ++rows;
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> v;
      while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
      REQUIRE(v.size() == 9);
      for (int k : {1, 2, 3, 4, 8}) CHECK(v[k] == 0.0);
    }
    CHECK(rows >= 2);
    CHECK(fs::exists(dir / "snapshots" / "u_00000000.fld"));
    const auto snap = read_snapshot(dir / "snapshots" / "u_00000000.fld");
    CHECK(snap.field.max_abs() == 0.0);
  }

  TEST_CASE("runs are deterministic") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    for (const auto& dir : {a, b}) {
      const auto c = parse_config(std::nullopt, {{"out", dir.string()}, {"N", "16"}, {"t_end", "2e-3"}, {"monitor_every", "20"}});
      CHECK(run_experiment(c) == ExitStatus::kCompleted);
    }
    CHECK(slurp(a / "monitor.csv") == slurp(b / "monitor.csv"));
    for (const auto& e : fs::directory_iterator(a / "snapshots")) {
      CHECK(slurp(e.path()) == slurp(b / "snapshots" / e.path().filename()));
    }
  }

  TEST_CASE("mollify and legendre experiments") {
    const auto m = scratch("mollify");
    CHECK(run_experiment(parse_config(std::nullopt, {{"out", m.string()}, {"N", "32"}}, "mollify")) ==
          ExitStatus::kCompleted);
    CHECK(slurp(m / "mollify.csv").rfind("h,sup_change,convexity_before,convexity_after\n", 0) == 0);

    const auto l = scratch("legendre");
    CHECK(run_experiment(parse_config(std::nullopt, {{"out", l.string()}, {"N", "32"}, {"dim", "1"}}, "legendre")) ==
          ExitStatus::kCompleted);
    const std::string csv = slurp(l / "legendre.csv");
    CHECK(csv.rfind("N,roundtrip_error,min_convexity\n8,", 0) == 0);
    CHECK(fs::exists(l / "snapshots" / "symplectic.fld"));
  }

  TEST_CASE("energies over the quartic sequence") {
    const auto dir = scratch("energies");
    const auto c = parse_config(std::nullopt, {{"out", dir.string()}, {"N", "32"}, {"m", "3"}}, "energies");
    CHECK(run_experiment(c) == ExitStatus::kCompleted);
    std::ifstream is(dir / "energies.csv");
    std::string line;
    std::getline(is, line);
    CHECK(line == "m,r,resolved,mismatch,calabi_energy,mabuchi_energy,total_energy,max_rm,max_grad");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 3);
  }

  TEST_CASE("command line exit codes") {
    const auto dir = scratch("cli");
    CHECK(run_cli("bounds --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "ledger.txt"));
    CHECK(run_cli("flow --N 12 --out " + dir.string()) == 1);
    CHECK(run_cli("flow --set nonsense=1 --out " + dir.string()) == 1);
    CHECK(run_cli("flow --set h=0.9") == 1);
    CHECK(run_cli("nonsense") == 1);
    CHECK(run_cli("flow --print-config") == 0);
    // Non-convex start: the flow refuses to run.
    CHECK(run_cli("flow --N 16 --set amplitude=0.2 --t-end 1e-4 --set snapshots=false --out " + dir.string()) == 2);
  }
}
