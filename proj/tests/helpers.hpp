#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "procline/charmap.hpp"
#include "procline/instantiate.hpp"
#include "procline/line.hpp"
#include "procline/model.hpp"
#include "procline/rules.hpp"

namespace testutil {

namespace fs = std::filesystem;

// Deterministic across platforms: mt19937_64 sequence is pinned by the
// standard; we avoid std::uniform_int_distribution on purpose.
struct Rng {
  std::mt19937_64 engine;

  explicit Rng(std::uint64_t seed) : engine(seed) {}
  std::uint64_t next(std::uint64_t bound) {
    return bound == 0 ? 0 : engine() % bound;
  }
  int range(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  bool coin() { return next(2) == 1; }
};

// --- model builders --------------------------------------------------------

inline void add_activity(procline::ProcessModel& m, const std::string& id,
                         bool iterative = false) {
  m.activities.push_back({id, id, "", iterative});
}

inline void add_product(procline::ProcessModel& m, const std::string& id,
                        bool standalone = false) {
  m.work_products.push_back({id, id, "", standalone});
}

inline std::string add_pf(procline::ProcessModel& m, const std::string& act,
                          const std::string& wp,
                          procline::FlowDirection dir =
                              procline::FlowDirection::produces) {
  m.product_flow.push_back({act, wp, dir});
  return procline::edge_key(m.product_flow.back());
}

inline std::string add_cf(procline::ProcessModel& m, const std::string& from,
                          const std::string& to) {
  m.control_flow.push_back({from, to});
  return procline::edge_key(m.control_flow.back());
}

inline procline::ProjectContext ctx_of(
    std::initializer_list<std::pair<std::string, procline::AttrValue>> items) {
  procline::ProjectContext ctx;
  for (const auto& [k, v] : items) ctx[k] = {v, 2, 2};
  return ctx;
}

// The satellite attribute declarations used across tests.
inline std::vector<procline::AttributeDef> satellite_defs() {
  using procline::MapKind;
  using procline::Scale;
  return {
      {"collaboration_type", Scale::nominal({"national", "international"}),
       MapKind::project},
      {"mission_type", Scale::nominal({"engineering", "science"}),
       MapKind::project},
      {"subsystem", Scale::id_set(), MapKind::project},
      {"supplier", Scale::id_set(), MapKind::project},
      {"complexity", Scale::ordinal(1, 3), MapKind::product},
      {"criticality", Scale::ordinal(1, 3), MapKind::product},
      {"size", Scale::ordinal(1, 3), MapKind::product},
      {"stable_requirements", Scale::boolean(), MapKind::product},
  };
}

// Hand-built copy of the satellite process line (same shape as
// fixtures/satellite/line.json) for tests that want to tweak it.
inline procline::ProcessLine satellite_line() {
  procline::ProcessModel m;
  add_activity(m, "A_SYS_DESIGN");
  add_activity(m, "A_SW_DESIGN");
  add_activity(m, "A_HWSW_ANALYSIS");
  add_activity(m, "A_CODE");
  add_activity(m, "A_TEST");
  add_activity(m, "A_QA_REVIEW");
  add_product(m, "W_SYS_SPEC");
  add_product(m, "W_SW_DESIGN_DOC");
  add_product(m, "W_CODE");
  add_product(m, "W_TEST_REPORT");
  add_product(m, "FMECA");
  add_product(m, "RationaleForDesign");

  add_pf(m, "A_SYS_DESIGN", "W_SYS_SPEC");
  add_pf(m, "A_SW_DESIGN", "W_SYS_SPEC", procline::FlowDirection::consumes);
  add_pf(m, "A_SW_DESIGN", "W_SW_DESIGN_DOC");
  add_pf(m, "A_CODE", "W_SW_DESIGN_DOC", procline::FlowDirection::consumes);
  add_pf(m, "A_CODE", "W_CODE");
  add_pf(m, "A_TEST", "W_CODE", procline::FlowDirection::consumes);
  add_pf(m, "A_TEST", "W_TEST_REPORT");
  add_pf(m, "A_QA_REVIEW", "W_TEST_REPORT", procline::FlowDirection::consumes);
  const std::string e_fmeca = add_pf(m, "A_HWSW_ANALYSIS", "FMECA");
  const std::string e_consume =
      add_pf(m, "A_HWSW_ANALYSIS", "W_SYS_SPEC", procline::FlowDirection::consumes);
  const std::string e_rationale = add_pf(m, "A_SW_DESIGN", "RationaleForDesign");

  add_cf(m, "A_SYS_DESIGN", "A_SW_DESIGN");
  add_cf(m, "A_SW_DESIGN", "A_CODE");
  add_cf(m, "A_CODE", "A_TEST");
  add_cf(m, "A_TEST", "A_QA_REVIEW");
  const std::string e_in = add_cf(m, "A_SW_DESIGN", "A_HWSW_ANALYSIS");
  const std::string e_out = add_cf(m, "A_HWSW_ANALYSIS", "A_CODE");

  m.views.push_back({"v_pf", procline::ViewKind::product_flow,
                     {"A_SYS_DESIGN", "W_SYS_SPEC", "FMECA", e_fmeca}});
  m.views.push_back({"v_cf", procline::ViewKind::control_flow,
                     {"A_SYS_DESIGN", "A_SW_DESIGN", "cf:A_SYS_DESIGN>A_SW_DESIGN"}});

  procline::ProcessLine line;
  line.model = std::move(m);
  line.attributes = satellite_defs();
  line.ruleset = procline::parse_rules(
      "Opt1.1: if collaboration_type == international then include(FMECA, "
      "A_HWSW_ANALYSIS)\n"
      "Opt1.2: resolve(Opt7)\n"
      "Opt2.1: if mission_type == engineering then include(RationaleForDesign)\n"
      "Opt7.1: if collaboration_type == international then include(" +
          e_in + ")\n",
      line.attributes);
  line.variation_points = {
      {"Opt1", "fmeca_analysis", {"FMECA", "A_HWSW_ANALYSIS", e_fmeca},
       {"Opt1.1", "Opt1.2"}},
      {"Opt2", "design_rationale", {"RationaleForDesign", e_rationale}, {"Opt2.1"}},
      {"Opt7", "fmeca_activities", {e_consume, e_in, e_out}, {"Opt7.1"}},
  };
  line.parametric_defaults = {{"reviews_per_phase", 1.0}, {"ivv_level", 1.0}};
  return line;
}

// --- subprocess driver for CLI tests ----------------------------------------

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline fs::path fresh_temp_dir(const std::string& tag) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() /
                       ("procline_test_" + tag + "_" +
                        std::to_string(::getpid()) + "_" +
                        std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

inline CliResult run_cli(const std::string& cli_path, const std::string& args) {
  const fs::path dir = fresh_temp_dir("cli");
  const fs::path out = dir / "stdout";
  const fs::path err = dir / "stderr";
  const std::string cmd = cli_path + " " + args + " >" + out.string() + " 2>" +
                          err.string();
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  fs::remove_all(dir);
  return result;
}

}  // namespace testutil
