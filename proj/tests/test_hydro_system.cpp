#include <cmath>
#include <random>

#include "doctest.h"
#include "hexweb/errors.hpp"
#include "hexweb/generators.hpp"
#include "hexweb/hydro_system.hpp"
#include "oracles.hpp"

using namespace hexweb;

namespace {

MetricField simple_wave() {
  return make_simple_wave(simple_wave_from_metric(1.0, 0.3, 1.2, Profile::linear(0.0, 20.0), 0.2));
}

MetricField dilation_kappa_one() {
  OdeFamilySpec s;
  s.family = OdeFamilySpec::Family::dilation;
  s.kappa = 1.0;
  s.s0 = 0.5;
  s.domain = {1.0, 2.0, 0.6, 1.0};
  return make_dilation_family(s);
}

}  // namespace

TEST_CASE("constant jets solve the web system") {
  std::mt19937_64 rng(7);
  for (int n = 0; n < 20; ++n) {
    const auto g = oracle::random_spd(rng);
    const HydroResidual r = hydro_residual(constant_jet(g[0], g[1], g[2]));
    CHECK(r.r1 == 0.0);
    CHECK(r.r2 == 0.0);
    CHECK(r.r3 == 0.0);
  }
}

TEST_CASE("residual of E = 1 + u by direct substitution") {
  const auto eval = jet_evaluator([](const Jet2& u, const Jet2&) {
    return std::array<Jet2, 3>{1.0 + u, Jet2(0.0), Jet2(1.0)};
  });
  const HydroResidual r = hydro_residual(eval({0.2, 0.1}));
  CHECK(r.r1 == 0.0);
  CHECK(r.r2 == 0.0);
  CHECK(r.r3 == doctest::Approx(1.0));
  CHECK(r.max_abs() == doctest::Approx(1.0));
}

TEST_CASE("translation family solves the system on a grid") {
  const MetricField f = make_translation_family({});
  double worst = 0.0;
  for (const auto& p : f.domain().interior_grid(20, 20)) {
    const MetricJet2 m = f.jet(p);
    worst = std::max(worst, hydro_residual(m).max_abs() / hydro_residual_scale(m));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("flat metric speeds") {
  const CharSpeeds s = characteristic_speeds(1.0, 0.0, 1.0);
  REQUIRE(s.all_real());
  const auto l = s.real();
  const double r5 = std::sqrt(5.0);
  CHECK(std::abs(l[0] + 1.0) < 1e-12);
  CHECK(std::abs(l[1] - (3.0 - r5) / 2.0) < 1e-12);
  CHECK(std::abs(l[2] - (3.0 + r5) / 2.0) < 1e-12);
  for (double x : l) CHECK(std::abs(oracle::cubic_value(1.0, 0.0, 1.0, x)) < 1e-12);
}

TEST_CASE("speeds of E = G = 1, F = 2 re-substitute into the cubic") {
  const CharSpeeds s = characteristic_speeds(1.0, 2.0, 1.0);
  for (const auto& z : s.lambda) {
    // G x^3 + (F - 2G) x^2 + (F - 2E) x + E with both middle terms zero.
    CHECK(std::abs(z * z * z + 1.0) < 1e-12);
  }
  // x^3 + 1: one real root and a complex pair, sorted by real part.
  CHECK_FALSE(s.all_real());
  CHECK(std::abs(s.lambda[0] - std::complex<double>(-1.0, 0.0)) < 1e-12);
  CHECK(s.lambda[1].imag() < s.lambda[2].imag());
}

TEST_CASE("speeds are sorted and satisfy Vieta and the speed identity") {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 200; ++n) {
    const auto g = oracle::random_spd(rng);
    const CharSpeeds s = characteristic_speeds(g[0], g[1], g[2]);
    CHECK(vieta_residual(g[0], g[1], g[2], s) < 1e-10);
    CHECK(lambdas_identity_residual(s) < 1e-10);
    CHECK(s.lambda[0].real() <= s.lambda[1].real());
    CHECK(s.lambda[1].real() <= s.lambda[2].real());
  }
}

TEST_CASE("vanishing leading coefficient is reported") {
  try {
    characteristic_speeds(1.0, 0.5, 0.0);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LeadingCoefficientZero);
  }
}

TEST_CASE("simple wave keeps its two frozen invariants") {
  const SimpleWaveSpec spec = simple_wave_from_metric(1.0, 0.3, 1.2, Profile::linear(0.0, 20.0), 0.2);
  const MetricField f = make_simple_wave(spec);
  double worst = 0.0;
  for (const auto& p : f.domain().interior_grid(10, 10)) {
    const MetricJet2 m = f.jet(p);
    const RiemannInvariants R = riemann_invariants(m.F, characteristic_speeds(m));
    worst = std::max(worst, std::abs(R.R1 - spec.c1) / (1.0 + std::abs(spec.c1)));
    worst = std::max(worst, std::abs(R.R2 - spec.c2) / (1.0 + std::abs(spec.c2)));
  }
  CHECK(worst < 1e-7);
}

TEST_CASE("invariants reject complex speeds and vanishing denominators") {
  try {
    riemann_invariants(2.0, characteristic_speeds(1.0, 2.0, 1.0));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ComplexSpeeds);
  }
  // 2ab - a - b - 1 = 0 at a = 1, b = 2.
  try {
    riemann_invariants(1.0, std::array<double, 3>{0.0, 1.0, 2.0});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DenominatorBlowup);
  }
}

TEST_CASE("semi-Hamiltonian residual on the dilation family") {
  const MetricField f = dilation_kappa_one();
  for (const ChartPoint p : {ChartPoint{1.3, 0.75}, ChartPoint{1.6, 0.85}}) {
    const double fine = std::abs(semi_hamiltonian_residual(f, p, 0, 1, 2, 1e-4));
    const double coarse = std::abs(semi_hamiltonian_residual(f, p, 0, 1, 2, 4e-4));
    CHECK(fine < 1e-4);
    CHECK(fine <= coarse);
  }
}

TEST_CASE("semi-Hamiltonian contract") {
  const MetricField f = dilation_kappa_one();
  try {
    semi_hamiltonian_residual(f, {1.5, 0.8}, 1, 1, 2);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
  const MetricField w = simple_wave();
  try {
    semi_hamiltonian_residual(w, w.domain().center(), 0, 1, 2);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonInvertibleInvariantChart);
  }
}
