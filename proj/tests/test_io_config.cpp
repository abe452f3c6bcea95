#include <string>

#include "doctest.h"
#include "hexweb/errors.hpp"
#include "hexweb/io/config.hpp"

using namespace hexweb;
using namespace hexweb::io;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text, "test.toml");
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("config accepted: " << text);
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c = parse_config("[family.flat]\n");
  CHECK(c.command == Command::verify);
  CHECK(c.grid.nu == 20);
  CHECK(c.grid.nv == 20);
  CHECK(c.integrator.rel_tol == 1e-12);
  CHECK(c.integrator.abs_tol == 1e-14);
  CHECK(c.verify.trajectories == 100);
  CHECK(c.verify.hexagon_eps == 0.1);
  CHECK(c.seed == 1);
  CHECK(std::holds_alternative<FlatFamily>(c.family));
  CHECK(c.checks == applicable_checks(c.family));
}

TEST_CASE("a full dilation section") {
  const RunConfig c = parse_config(R"(
command = "trace"
seed = 9
checks = ["curvature", "pde"]

[family.dilation]
kappa = -2.0
constraint = "b"
s0 = 1.0
j0 = 1.0
f0 = 0.2
domain = [1.0, 2.0, 1.0, 1.5]

[grid]
nu = 8
nv = 6

[integrator]
rel_tol = 1e-10
)");
  CHECK(c.command == Command::trace);
  CHECK(c.seed == 9);
  CHECK(c.grid.nu == 8);
  CHECK(c.grid.nv == 6);
  CHECK(c.integrator.rel_tol == 1e-10);
  const auto* s = std::get_if<OdeFamilySpec>(&c.family);
  REQUIRE(s);
  CHECK(s->family == OdeFamilySpec::Family::dilation);
  CHECK(s->constraint == OdeFamilySpec::Constraint::b);
  CHECK(s->domain.v1 == 1.5);
  // Checks come back in report order, not file order.
  REQUIRE(c.checks.size() == 2);
  CHECK(c.checks[0] == Check::pde);
  CHECK(c.checks[1] == Check::curvature);
}

TEST_CASE("profiles") {
  const RunConfig c = parse_config(R"(
[family.translation]
h = { kind = "exp", params = [2.0, 0.5, 1.0] }
f0 = 4.0
)");
  const auto* t = std::get_if<TranslationFamilySpec>(&c.family);
  REQUIRE(t);
  CHECK(t->h.kind() == Profile::Kind::exp);
  CHECK(t->h(0.0) == doctest::Approx(2.5));
  CHECK(kind_of("[family.translation]\nh = { kind = \"trig\", params = [1.0] }\n") == ErrorKind::ValidationError);
  CHECK(kind_of("[family.translation]\nh = { kind = \"spline\", params = [1.0] }\n") == ErrorKind::ValidationError);
}

TEST_CASE("exactly one family") {
  CHECK(kind_of("command = \"verify\"\n") == ErrorKind::ValidationError);
  CHECK(kind_of("[family.flat]\n[family.spiral]\n") == ErrorKind::ValidationError);
}

TEST_CASE("unknown keys are rejected") {
  CHECK(kind_of("[family.flat]\ncolour = 3\n") == ErrorKind::ValidationError);
  CHECK(kind_of("[family.flat]\n[grid]\nnw = 3\n") == ErrorKind::ValidationError);
  CHECK(kind_of("frobnicate = true\n[family.flat]\n") == ErrorKind::ValidationError);
  try {
    parse_config("[family.flat]\n[verify]\nhexagon = 0.1\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("verify.hexagon") != std::string::npos);
  }
}

TEST_CASE("values are validated") {
  CHECK(kind_of("command = \"launch\"\n[family.flat]\n") == ErrorKind::ValidationError);
  CHECK(kind_of("[family.flat]\n[grid]\nnu = 1\n") == ErrorKind::ValidationError);
  CHECK(kind_of("[family.flat]\n[integrator]\nrel_tol = -1.0\n") == ErrorKind::ValidationError);
  CHECK(kind_of("[family.dual_dim3]\neps = 2\n") == ErrorKind::ValidationError);
  CHECK(kind_of("[family.dilation]\nconstraint = \"a\"\ndegenerate = true\n") == ErrorKind::ValidationError);
  CHECK(kind_of("seed = -4\n[family.flat]\n") == ErrorKind::ValidationError);
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_config("[family.flat]\nseed = = 3\n", "bad.toml");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("bad.toml:2:") != std::string::npos);
  }
}

TEST_CASE("check filtering") {
  RunConfig c = parse_config("[family.flat]\n");
  set_checks(c, {"closure", "pde"});
  REQUIRE(c.checks.size() == 2);
  CHECK(c.checks[0] == Check::pde);
  CHECK_THROWS_AS(set_checks(c, {"semih"}), Error);
  CHECK_THROWS_AS(set_checks(c, {"pde", "pde"}), Error);
  CHECK_THROWS_AS(set_checks(c, {"speed"}), Error);

  const RunConfig d = parse_config("[family.dual_dim3]\n");
  CHECK(d.checks == std::vector<Check>{Check::pde, Check::hexagonality, Check::pfaff, Check::planarity, Check::blaschke});
  CHECK(is_dual(d.family));
}

TEST_CASE("applicable checks by family") {
  auto has = [](const FamilySpec& f, Check c) {
    const auto v = applicable_checks(f);
    return std::find(v.begin(), v.end(), c) != v.end();
  };
  OdeFamilySpec spiral;
  CHECK(has(spiral, Check::semih));
  OdeFamilySpec degenerate;
  degenerate.family = OdeFamilySpec::Family::dilation;
  degenerate.degenerate_branch = true;
  CHECK_FALSE(has(degenerate, Check::semih));
  CHECK_FALSE(has(TranslationFamilySpec{}, Check::semih));
  CHECK(has(SimpleWaveFamily{}, Check::hodograph));
  CHECK_FALSE(has(FlatFamily{}, Check::hodograph));
  CHECK(applicable_checks(ConstantCurvatureFamily{}) == std::vector<Check>{Check::curvature});
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"flat", "translation", "translation_nonpositive", "spiral", "dilation", "dilation_a",
                           "dilation_b", "dilation_c", "dilation_degenerate", "simple_wave", "sphere", "dual_dim3",
                           "dual_dim2"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(std::string(HEXWEB_CONFIG_DIR) + "/" + name + ".toml"));
  }
  try {
    load_config("/nonexistent/config.toml");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
}

TEST_CASE("names round trip") {
  for (Command c : {Command::generate, Command::verify, Command::trace, Command::dual, Command::plot}) {
    CHECK(parse_command(to_string(c)) == c);
  }
  for (Check c : {Check::pde, Check::integral, Check::blaschke, Check::closure, Check::curvature, Check::semih,
                  Check::hodograph, Check::hexagonality, Check::pfaff, Check::planarity}) {
    CHECK(parse_check(to_string(c)) == c);
  }
  CHECK_FALSE(parse_check("nope").has_value());
}
