#include <catch_amalgamated.hpp>

#include "generators.hpp"
#include "helpers.hpp"
#include "procline/charmap.hpp"

using namespace procline;

namespace {

const std::vector<AttributeDef>& defs() {
  static const auto d = testutil::satellite_defs();
  return d;
}

CharacterizationMap load(const std::string& csv,
                         std::vector<Finding>* warnings = nullptr) {
  return load_map(csv, defs(), std::nullopt, warnings);
}

}  // namespace

TEST_CASE("rows are parsed, trimmed, and canonicalized") {
  const auto map = load(
      "entity,kind,attribute,value,likelihood,damage\n"
      "Sat1,existing,collaboration_type, National ,3,3\n");
  REQUIRE(map.entries.size() == 1);
  const auto& e = map.entries.front();
  CHECK(e.entity_id == "Sat1");
  CHECK(e.attribute == "collaboration_type");
  CHECK(e.value == AttrValue{std::string("national")});
  CHECK(e.likelihood == 3);
  CHECK(e.damage == 3);
  CHECK(map.kind == MapKind::project);
  REQUIRE(map.entities.size() == 1);
  CHECK(map.entities.front().entity_kind == EntityKind::existing);
}

TEST_CASE("boolean cells accept the yes/no spelling of the tables") {
  const auto map = load(
      "entity,kind,attribute,value,likelihood,damage\n"
      "Sat2sub3,existing,stable_requirements,no,3,3\n");
  REQUIRE(map.entries.size() == 1);
  CHECK(map.entries.front().value == AttrValue{false});
  CHECK(map.kind == MapKind::product);
}

TEST_CASE("ordinal values outside the declared range are E_SCALE") {
  try {
    load(
        "entity,kind,attribute,value,likelihood,damage\n"
        "Sat1,existing,complexity,5,2,2\n");
    FAIL("expected E_SCALE");
  } catch (const Error& e) {
    CHECK(e.code() == "E_SCALE");
  }
}

TEST_CASE("empty input yields an empty map without error") {
  const auto map = load("");
  CHECK(map.entries.empty());
  CHECK(map.entities.empty());
}

TEST_CASE("header is mandatory for non-empty input") {
  try {
    load("Sat1,existing,complexity,3,2,2\n");
    FAIL("expected E_CSV");
  } catch (const Error& e) {
    CHECK(e.code() == "E_CSV");
  }
}

TEST_CASE("duplicate entity+attribute rows are E_DUP") {
  try {
    load(
        "entity,kind,attribute,value,likelihood,damage\n"
        "Sat1,existing,complexity,3,2,2\n"
        "Sat1,existing,complexity,2,2,2\n");
    FAIL("expected E_DUP");
  } catch (const Error& e) {
    CHECK(e.code() == "E_DUP");
  }
}

TEST_CASE("undeclared attributes are E_UNDECLARED") {
  try {
    load(
        "entity,kind,attribute,value,likelihood,damage\n"
        "Sat1,existing,launch_mass,3,2,2\n");
    FAIL("expected E_UNDECLARED");
  } catch (const Error& e) {
    CHECK(e.code() == "E_UNDECLARED");
  }
}

TEST_CASE("field-count mismatches are E_CSV with the line number") {
  try {
    load(
        "entity,kind,attribute,value,likelihood,damage\n"
        "Sat1,existing,complexity,3,2\n");
    FAIL("expected E_CSV");
  } catch (const Error& e) {
    CHECK(e.code() == "E_CSV");
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("mixing map kinds in one file is rejected") {
  try {
    load(
        "entity,kind,attribute,value,likelihood,damage\n"
        "Sat1,existing,collaboration_type,national,2,2\n"
        "Sat1sub1,existing,complexity,3,2,2\n");
    FAIL("expected E_UNDECLARED");
  } catch (const Error& e) {
    CHECK(e.code() == "E_UNDECLARED");
  }
}

TEST_CASE("missing likelihood/damage default to 2,2 with a warning") {
  std::vector<Finding> warnings;
  const auto map = load(
      "entity,kind,attribute,value,likelihood,damage\n"
      "Sat1,existing,complexity,3,,\n",
      &warnings);
  REQUIRE(map.entries.size() == 1);
  CHECK(map.entries.front().likelihood == 2);
  CHECK(map.entries.front().damage == 2);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings.front().code == "W_DEFAULT_PRIORITY");
}

TEST_CASE("id_set cells use semicolons and are stored sorted") {
  const auto map = load(
      "entity,kind,attribute,value,likelihood,damage\n"
      "Sat1,existing,subsystem,3;1;2,2,2\n");
  REQUIRE(map.entries.size() == 1);
  CHECK(map.entries.front().value ==
        AttrValue{std::vector<std::string>{"1", "2", "3"}});
}

TEST_CASE("nominal canonicalization is case-insensitive") {
  const auto a = load(
      "entity,kind,attribute,value,likelihood,damage\n"
      "Sat1,existing,collaboration_type,International,2,2\n");
  const auto b = load(
      "entity,kind,attribute,value,likelihood,damage\n"
      "Sat1,existing,collaboration_type,international,2,2\n");
  CHECK(a == b);
}

TEST_CASE("priority score is likelihood times damage") {
  CHECK(priority_score({"e", "a", AttrValue{1}, 3, 3}) == 9);
  CHECK(priority_score({"e", "a", AttrValue{1}, 1, 1}) == 1);
  CHECK(priority_score({"e", "a", AttrValue{1}, 2, 3}) == 6);
}

TEST_CASE("priority score is monotone in both factors") {
  for (int l = 1; l <= 3; ++l)
    for (int d = 1; d <= 3; ++d)
      for (int l2 = l; l2 <= 3; ++l2)
        for (int d2 = d; d2 <= 3; ++d2) {
          const int base = priority_score({"e", "a", AttrValue{1}, l, d});
          const int grown = priority_score({"e", "a", AttrValue{1}, l2, d2});
          REQUIRE(grown >= base);
        }
}

TEST_CASE("lookup returns the canonical value or absence") {
  const auto map = load(
      "entity,kind,attribute,value,likelihood,damage\n"
      "Sat1,existing,collaboration_type,National,3,3\n"
      "Sat1,existing,mission_type,Engineering,2,2\n"
      "Sat2,existing,collaboration_type,International,3,3\n"
      "Sat2,existing,mission_type,Science,2,2\n");
  CHECK(lookup(map, "Sat2", "mission_type") ==
        std::optional<AttrValue>{std::string("science")});
  CHECK_FALSE(lookup(map, "Sat1", "subsystem").has_value());
  try {
    lookup(map, "Sat1", "launch_mass");
    FAIL("expected E_UNDECLARED");
  } catch (const Error& e) {
    CHECK(e.code() == "E_UNDECLARED");
  }
}

TEST_CASE("print_map then load_map is the identity up to row order") {
  const std::string csv =
      "entity,kind,attribute,value,likelihood,damage\n"
      "Sat2,future,mission_type,Science,2,3\n"
      "Sat1,existing,collaboration_type,National,3,3\n"
      "Sat1,existing,subsystem,1;2;3,2,2\n"
      "Sat2,future,collaboration_type,International,3,3\n";
  const auto map = load(csv);
  const auto reloaded = load(print_map(map));
  CHECK(reloaded.kind == map.kind);
  CHECK(reloaded.attributes == map.attributes);

  auto normalized = [](CharacterizationMap m) {
    std::sort(m.entities.begin(), m.entities.end(),
              [](const EntityRecord& a, const EntityRecord& b) {
                return a.entity_id < b.entity_id;
              });
    std::sort(m.entries.begin(), m.entries.end(),
              [](const CharacterizationEntry& a, const CharacterizationEntry& b) {
                return std::tie(a.entity_id, a.attribute) <
                       std::tie(b.entity_id, b.attribute);
              });
    return m;
  };
  CHECK(normalized(reloaded) == normalized(map));
}

TEST_CASE("round-trip holds on randomized maps") {
  testutil::Rng rng(2024);
  for (int round = 0; round < 50; ++round) {
    std::string csv = "entity,kind,attribute,value,likelihood,damage\n";
    const int entities = rng.range(1, 4);
    for (int e = 1; e <= entities; ++e) {
      if (rng.coin())
        csv += "P" + std::to_string(e) + ",existing,complexity," +
               std::to_string(rng.range(1, 3)) + "," +
               std::to_string(rng.range(1, 3)) + "," +
               std::to_string(rng.range(1, 3)) + "\n";
      if (rng.coin())
        csv += "P" + std::to_string(e) + ",existing,stable_requirements," +
               (rng.coin() ? "Yes" : "NO") + ",2,2\n";
      if (rng.coin())
        csv += "P" + std::to_string(e) + ",existing,size," +
               std::to_string(rng.range(1, 3)) + ",1,3\n";
    }
    const auto map = load(csv);
    if (map.entries.empty()) continue;
    const auto reloaded = load(print_map(map));
    REQUIRE(print_map(reloaded) == print_map(map));
  }
}
