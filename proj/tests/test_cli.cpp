#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "ncfractal/errors.hpp"
#include "scenario.hpp"
#include "support.hpp"

using namespace ncfractal;
using namespace ncfractal::cli;

namespace {

const std::filesystem::path kScenarios = NCFRACTAL_SCENARIO_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kTiny = R"({
  "name": "tiny",
  "space": {"d": [[0, 1], [1, 0]]},
  "maps": [[0, 0], [1, 1]],
  "weights": [0.5, 0.5]
})";

}  // namespace

TEST_CASE("bundled scenarios load") {
  const Scenario s = load_scenario(kScenarios / "shift2.json");
  CHECK(s.name == "shift2");
  CHECK(s.commutative());
  CHECK(s.space->n_points() == 4);
  CHECK(s.ifs.size() == 2);
  CHECK(s.weights.size() == 2);
  CHECK(s.find_state("phi0") != nullptr);
  CHECK(s.find_state("nope") == nullptr);
  CHECK(s.find_bump("first_half") != nullptr);
  CHECK(s.codespace_depth == 8);

  for (const char* f : {"shift3", "discrete3", "random5", "qubit", "m2c_collapse"}) {
    CAPTURE(f);
    CHECK_NOTHROW(load_scenario(kScenarios / (std::string(f) + ".json")));
  }
}

TEST_CASE("parse errors carry a byte offset") {
  const std::string text = slurp(kScenarios / "shift2.json");
  const std::string cut = text.substr(0, text.size() / 2);
  try {
    parse_scenario(cut, "cut");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.byte() > 0);
    CHECK(e.byte() <= cut.size() + 1);
  }
}

TEST_CASE("schema errors name the key path") {
  CHECK_NOTHROW(parse_scenario(kTiny, "tiny"));
  std::string bad = kTiny;
  bad.replace(bad.find("[0.5, 0.5]"), 10, "[0.5, 0.4]");
  try {
    parse_scenario(bad, "bad");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.path().find("weights") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario(R"({"space": {"d": [[0, 1], [1, 0]]}, "maps": "no"})", "x"), SchemaError);
}

TEST_CASE("validation errors for mathematically invalid input") {
  // Not unitary.
  const char* text = R"({
    "algebra": {"blocks": [2]},
    "seminorm": {"type": "traceless"},
    "homs": [{"type": "unitary", "u": {"blocks": [[[1, 1], [0, 1]]]}}],
    "weights": [1.0]
  })";
  CHECK_THROWS_AS(parse_scenario(text, "x"), ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"space": {"d": [[0, 1], [1, 0]]}, "maps": [[0, 2]]})", "x"), ValidationError);
}

TEST_CASE("morphism key aliases") {
  const char* point = R"({
    "algebra": {"blocks": [1, 1]},
    "seminorm": {"type": "metric", "d": [[0, 1], [1, 0]]},
    "homs": [{"type": "point_map", "g": [0, 0]}, {"type": "point_map", "map": [1, 1]}],
    "weights": [0.5, 0.5]
  })";
  const Scenario s = parse_scenario(point, "alias");
  CHECK(s.ifs.size() == 2);
  // f(b) = b o g
  CHECK(testing::close(s.ifs[0](testing::diag({1, 0})), testing::diag({1, 1}), 0.0));
  CHECK(testing::close(s.ifs[1](testing::diag({1, 0})), testing::diag({0, 0}), 0.0));
}

TEST_CASE("commands on shift2") {
  const Scenario s = load_scenario(kScenarios / "shift2.json");
  Flags flags;
  auto r = run_command("selfsim-check", s, flags);
  CHECK(r.pass);
  CHECK(r.report["reports"][0]["defect"]["value"].get<double>() <= 1e-9);

  r = run_command("dilation", s, flags);
  CHECK(r.pass);
  for (const auto& m : r.report["maps"]) CHECK(m["dilation"]["upper"]["value"].get<double>() == doctest::Approx(0.5));

  CHECK_THROWS_AS(run_command("nonsense", s, flags), std::invalid_argument);
}

TEST_CASE("every command runs on a commutative scenario and is deterministic") {
  const Scenario s = load_scenario(kScenarios / "shift2.json");
  Flags flags;
  flags.seed = 7;
  for (const auto& c : command_names()) {
    CAPTURE(c);
    const auto a = run_command(c, s, flags);
    const auto b = run_command(c, s, flags);
    CHECK(dump_json(a.report) == dump_json(b.report));
    CHECK(a.report["command"] == c);
  }
}

TEST_CASE("qubit scenario") {
  const Scenario s = load_scenario(kScenarios / "qubit.json");
  Flags flags;
  CHECK(run_command("validate", s, flags).pass);
  CHECK(run_command("selfsim-check", s, flags).pass);
  // Not contractive: the support-invariance theorem does not apply.
  CHECK_THROWS_AS(run_command("support-invariance", s, flags), PreconditionError);
}
