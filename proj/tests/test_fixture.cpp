#include <catch_amalgamated.hpp>

#include "helpers.hpp"
#include "procline/fixture.hpp"
#include "procline/instantiate.hpp"
#include "procline/json_io.hpp"

using namespace procline;

TEST_CASE("generated fixtures validate cleanly at the published scale") {
  const auto fixture = gen_fixture({76, 54, 18, 18, 7});
  CHECK(validate_model(fixture.line.model).empty());
  CHECK(validate_line(to_line(fixture.line)).empty());
  CHECK(fixture.line.variation_points.size() == 2);
  CHECK(fixture.contexts.size() == 2);

  const auto stats = line_stats(to_line(fixture.line));
  size_t variants = 0;
  for (const auto& [vp, count] : stats.variant_counts) variants += count;
  CHECK(stats.core_count + variants == stats.total);
  CHECK(stats.total == model_elements(fixture.line.model).size());
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = gen_fixture({76, 54, 18, 18, 7});
  const auto b = gen_fixture({76, 54, 18, 18, 7});
  CHECK(print_model_document(a.line) == print_model_document(b.line));
  CHECK(a.contexts == b.contexts);

  const auto c = gen_fixture({76, 54, 18, 18, 8});
  CHECK(print_model_document(a.line) != print_model_document(c.line));
}

TEST_CASE("small and degenerate sizes stay valid") {
  for (const FixtureSpec spec : {FixtureSpec{0, 0, 0, 0, 1},
                                 FixtureSpec{1, 0, 1, 1, 2},
                                 FixtureSpec{2, 1, 0, 0, 3},
                                 FixtureSpec{3, 2, 1, 1, 4},
                                 FixtureSpec{5, 3, 40, 40, 5}}) {
    const auto fixture = gen_fixture(spec);
    CHECK(validate_model(fixture.line.model).empty());
    CHECK(static_cast<int>(fixture.line.model.activities.size()) ==
          spec.activities);
    CHECK(static_cast<int>(fixture.line.model.work_products.size()) ==
          spec.artifacts);
  }
}

TEST_CASE("negative counts are rejected") {
  try {
    gen_fixture({-1, 5, 1, 1, 1});
    FAIL("expected E_SCHEMA");
  } catch (const Error& e) {
    CHECK(e.code() == "E_SCHEMA");
  }
}

TEST_CASE("both generated contexts instantiate to valid models") {
  const auto fixture = gen_fixture({76, 54, 18, 18, 11});
  const auto line = to_line(fixture.line);
  for (const auto& [name, text] : fixture.contexts) {
    const auto ctx = parse_context(text, line.attributes);
    const auto inst = instantiate(line, ctx);
    CHECK(validate_model(inst.model).empty());
  }
}

TEST_CASE("the international engineering context keeps both variation points") {
  const auto fixture = gen_fixture({20, 10, 2, 2, 3});
  const auto line = to_line(fixture.line);
  const auto intl = parse_context(
      fixture.contexts.at("ctx_international_engineering.json"), line.attributes);
  const auto natl = parse_context(
      fixture.contexts.at("ctx_national_science.json"), line.attributes);

  const auto a = instantiate(line, intl);
  CHECK(a.included_vps == std::vector<std::string>{"Opt1", "Opt2"});
  CHECK(a.parameters.at("reviews_per_phase") == ParamValue{2.0});

  const auto b = instantiate(line, natl);
  CHECK(b.excluded_vps == std::vector<std::string>{"Opt1", "Opt2"});
  CHECK(model_elements(b.model) == line_core(line));
  CHECK(b.parameters.at("reviews_per_phase") == ParamValue{1.0});
}
