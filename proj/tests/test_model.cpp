#include <catch_amalgamated.hpp>

#include "helpers.hpp"
#include "procline/fixture.hpp"
#include "procline/model.hpp"

using namespace procline;
using testutil::add_activity;
using testutil::add_cf;
using testutil::add_pf;
using testutil::add_product;

namespace {

std::vector<std::string> codes(const ValidationReport& report) {
  std::vector<std::string> out;
  for (const auto& f : report) out.push_back(f.code);
  return out;
}

bool has_finding(const ValidationReport& report, const std::string& code,
                 const std::string& element) {
  for (const auto& f : report)
    if (f.code == code && f.element == element) return true;
  return false;
}

}  // namespace

TEST_CASE("minimal well-formed model validates cleanly") {
  ProcessModel m;
  add_activity(m, "A1");
  add_product(m, "W1");
  add_pf(m, "A1", "W1");
  REQUIRE(validate_model(m).empty());
}

TEST_CASE("control-flow cycle without an iterative activity is reported") {
  ProcessModel m;
  add_activity(m, "A1");
  add_activity(m, "A2");
  add_cf(m, "A1", "A2");
  add_cf(m, "A2", "A1");
  const auto report = validate_model(m);
  REQUIRE(report.size() == 1);
  CHECK(report.front().code == "CYCLE");
  CHECK(report.front().element == "A1");
}

TEST_CASE("cycle through an iterative activity is legal") {
  ProcessModel m;
  add_activity(m, "A1");
  add_activity(m, "A2", /*iterative=*/true);
  add_cf(m, "A1", "A2");
  add_cf(m, "A2", "A1");
  REQUIRE(validate_model(m).empty());
}

TEST_CASE("iterative activity elsewhere does not sanction a disjoint loop") {
  // A<->B passes through iterative B, but A<->C avoids it.
  ProcessModel m;
  add_activity(m, "A");
  add_activity(m, "B", /*iterative=*/true);
  add_activity(m, "C");
  add_cf(m, "A", "B");
  add_cf(m, "B", "A");
  add_cf(m, "A", "C");
  add_cf(m, "C", "A");
  const auto report = validate_model(m);
  REQUIRE(report.size() == 1);
  CHECK(report.front().code == "CYCLE");
  CHECK(report.front().element == "A");
}

TEST_CASE("self-loop is invalid even on an iterative activity") {
  ProcessModel m;
  add_activity(m, "A1", /*iterative=*/true);
  add_cf(m, "A1", "A1");
  const auto report = validate_model(m);
  REQUIRE(has_finding(report, "CYCLE", "A1"));
}

TEST_CASE("dangling product-flow reference is reported") {
  ProcessModel m;
  add_activity(m, "A1");
  add_pf(m, "A1", "W9");
  const auto report = validate_model(m);
  REQUIRE(has_finding(report, "DANGLING_REF", "W9"));
}

TEST_CASE("dangling control-flow endpoints are reported") {
  ProcessModel m;
  add_activity(m, "A1");
  add_cf(m, "A1", "A9");
  REQUIRE(has_finding(validate_model(m), "DANGLING_REF", "A9"));
}

TEST_CASE("activities and work products share one id namespace") {
  ProcessModel m;
  add_activity(m, "X");
  add_product(m, "X", /*standalone=*/true);
  REQUIRE(has_finding(validate_model(m), "DUP_ID", "X"));
}

TEST_CASE("duplicate edge triples are reported under the canonical key") {
  ProcessModel m;
  add_activity(m, "A1");
  add_product(m, "W1");
  add_pf(m, "A1", "W1");
  add_pf(m, "A1", "W1");
  REQUIRE(has_finding(validate_model(m), "DUP_ID", "pf:A1>W1:produces"));

  // different direction is a different edge
  ProcessModel m2;
  add_activity(m2, "A1");
  add_product(m2, "W1");
  add_pf(m2, "A1", "W1");
  add_pf(m2, "A1", "W1", FlowDirection::modifies);
  REQUIRE(validate_model(m2).empty());
}

TEST_CASE("work product without flow needs the standalone flag") {
  ProcessModel m;
  add_product(m, "W1");
  REQUIRE(has_finding(validate_model(m), "ORPHAN_PRODUCT", "W1"));

  ProcessModel m2;
  add_product(m2, "W1", /*standalone=*/true);
  REQUIRE(validate_model(m2).empty());
}

TEST_CASE("views are checked for membership and kind consistency") {
  ProcessModel m;
  add_activity(m, "A1");
  add_product(m, "W1");
  const std::string pf_key = add_pf(m, "A1", "W1");
  m.views.push_back({"v1", ViewKind::product_flow, {"A1", "W1", pf_key}});
  REQUIRE(validate_model(m).empty());

  m.views.push_back({"v2", ViewKind::control_flow, {"W1"}});
  m.views.push_back({"v3", ViewKind::product_flow, {"GHOST"}});
  const auto report = validate_model(m);
  CHECK(has_finding(report, "BAD_VIEW", "v2"));
  CHECK(has_finding(report, "BAD_VIEW", "v3"));
}

TEST_CASE("malformed ids are reported") {
  ProcessModel m;
  add_activity(m, "bad id");
  add_activity(m, "");
  const auto report = validate_model(m);
  CHECK(has_finding(report, "BAD_ID", "bad id"));
  CHECK(has_finding(report, "BAD_ID", ""));
}

TEST_CASE("validation is pure and idempotent") {
  ProcessModel m;
  add_activity(m, "A1");
  add_activity(m, "A2");
  add_cf(m, "A1", "A2");
  add_cf(m, "A2", "A1");
  add_pf(m, "A1", "W_MISSING");
  const ProcessModel copy = m;
  const auto first = validate_model(m);
  const auto second = validate_model(m);
  CHECK(first == second);
  CHECK(m == copy);
}

TEST_CASE("model_elements returns the canonical element universe") {
  ProcessModel m;
  add_activity(m, "A1");
  add_product(m, "W1");
  add_pf(m, "A1", "W1");
  CHECK(model_elements(m) ==
        std::set<std::string>{"A1", "W1", "pf:A1>W1:produces"});

  CHECK(model_elements(ProcessModel{}).empty());
}

TEST_CASE("model_elements covers the satellite excerpt work products") {
  const auto line = testutil::satellite_line();
  const auto elements = model_elements(line.model);
  CHECK(elements.count("FMECA") == 1);
  CHECK(elements.count("RationaleForDesign") == 1);
  CHECK(elements.count("A_HWSW_ANALYSIS") == 1);
}

TEST_CASE("model_elements contains every id used by an edge of a valid model") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto fixture = gen_fixture({12, 8, 2, 2, seed});
    const auto& m = fixture.line.model;
    REQUIRE(validate_model(m).empty());
    const auto elements = model_elements(m);
    for (const auto& e : m.product_flow) {
      CHECK(elements.count(e.activity) == 1);
      CHECK(elements.count(e.work_product) == 1);
      CHECK(elements.count(edge_key(e)) == 1);
    }
    for (const auto& e : m.control_flow) {
      CHECK(elements.count(e.from) == 1);
      CHECK(elements.count(e.to) == 1);
      CHECK(elements.count(edge_key(e)) == 1);
    }
  }
}

TEST_CASE("desk-scale fixture reproduces the published counts") {
  const auto fixture = gen_fixture({76, 54, 18, 18, 7});
  const auto& m = fixture.line.model;
  REQUIRE(validate_model(m).empty());
  CHECK(m.activities.size() == 76);
  CHECK(m.work_products.size() == 54);
  size_t pf_views = 0, cf_views = 0;
  for (const auto& v : m.views)
    (v.kind == ViewKind::product_flow ? pf_views : cf_views) += 1;
  CHECK(pf_views == 18);
  CHECK(cf_views == 18);
}
