#include <set>
#include <string>

#include "doctest.h"

#include "loghold/config.hpp"

using namespace loghold;

namespace {

const char* kMinimal = R"(
kind = "preservation"
name = "minimal"
[velocity]
kind = "zero"
[initial]
kind = "log_holder_cap"
[modulus]
family = "log_holder"
exponents = [0.5]
[estimator]
r_max = 0.1
count = 6
)";

std::string with(const std::string& extra) { return std::string(kMinimal) + extra; }

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal preservation config") {
    const auto c = parse_config(kMinimal);
    CHECK(c.kind == ExperimentKind::preservation);
    CHECK(c.velocity_kind == "zero");
    CHECK(c.radii.size() == 6);
    CHECK(c.radii.front() == 0.1);
    CHECK(c.echo.at("velocity.kind") == "zero");
    CHECK(c.echo.at("tolerances.gap") == 0.05);
  }

  TEST_CASE("Holder exponent outside (0, 1] is rejected") {
    const auto msg = error_of(R"(
kind = "sandwich"
[velocity]
kind = "zero"
[initial]
kind = "abs_power"
[modulus]
family = "holder"
exponents = [1.5]
[estimator]
r_max = 0.1
count = 6
)");
    CHECK(msg.find("holder requires 0 < beta <= 1") != std::string::npos);
  }

  TEST_CASE("radii above s_max are rejected naming the bound") {
    const auto msg2 = error_of(R"(
kind = "preservation"
[velocity]
kind = "zero"
[initial]
kind = "log_holder_cap"
[modulus]
family = "log_holder"
exponents = [0.5]
[estimator]
radii = [0.5, 0.1, 0.05, 0.01]
)");
    CHECK(msg2.find("s_max = 0.3") != std::string::npos);
  }

  TEST_CASE("unknown keys are rejected with their line") {
    try {
      parse_config(with("bogus = 1\n"));
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "estimator.bogus");
      CHECK(e.line() > 0);
    }
  }

  TEST_CASE("syntax errors carry the line number") {
    try {
      parse_document("a = 1\nb = [1, 2\nc = \"x\"\n");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(e.line() >= 2);
    }
    CHECK_THROWS_AS(parse_document("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_document("a = \"unterminated\n"), ConfigError);
  }

  TEST_CASE("document syntax") {
    const auto doc = parse_document(R"(
# comment
top = 1.5e-3  # trailing
flag = true
[sec]
name = "a # b"
arr = [1, 2,
       3]
inline = { x = 1, y = "z" }
)");
    CHECK(doc.at("top").number == 1.5e-3);
    CHECK(doc.at("flag").boolean);
    CHECK(doc.at("sec.name").string == "a # b");
    CHECK(doc.at("sec.arr").array.size() == 3);
    CHECK(doc.at("sec.inline.x").number == 1.0);
    CHECK(doc.at("sec.inline.y").string == "z");
  }

  TEST_CASE("overrides") {
    auto doc = parse_document(kMinimal);
    apply_override(doc, "time.t_end=0.5");
    apply_override(doc, "time.outputs=[0.25, 0.5]");
    apply_override(doc, "velocity.kind=linear_strain");
    apply_override(doc, "velocity.lambda=2");
    const auto c = build_config(doc);
    CHECK(c.t_end == 0.5);
    CHECK(c.outputs.size() == 2);
    CHECK(c.velocity_kind == "linear_strain");
    CHECK(c.velocity_params.at("lambda") == 2.0);
    CHECK_THROWS_AS(apply_override(doc, "nonexistent.key=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
  }

  TEST_CASE("semantic checks") {
    CHECK_FALSE(error_of(with("[velocity]\nkind = \"vortex\"\n")).empty());
    CHECK_FALSE(error_of(with("[time]\noutputs = [0.33333]\ndt = 0.1\n")).empty());
    CHECK_FALSE(error_of(with("[tolerances]\ngap = -1\n")).empty());
    CHECK_FALSE(error_of(with("[estimator]\nsampler = \"grid\"\n")).empty());
    CHECK_FALSE(error_of(R"(
kind = "euler_growth"
[euler]
n = 64
[estimator]
r_max = 0.3
ratio = 0.82
count = 5
)").empty());
  }

  TEST_CASE("schema lists every key once") {
    const auto& s = config_schema();
    std::set<std::string> seen;
    for (const auto& [k, d] : s) {
      CHECK(seen.insert(k).second);
      CHECK_FALSE(d.empty());
    }
    CHECK(seen.count("tolerances.gap") == 1);
  }
}
