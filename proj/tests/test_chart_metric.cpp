#include <cmath>
#include <random>

#include "doctest.h"
#include "hexweb/chart_metric.hpp"
#include "hexweb/duality.hpp"
#include "hexweb/errors.hpp"
#include "hexweb/generators.hpp"
#include "oracles.hpp"

using namespace hexweb;

namespace {

// E = G = h^2, F = f0 h - h^2 with h = 2 + sin(v - u), f0 = 5.
std::array<double, 3> translation_metric(double u, double v) {
  const double h = 2.0 + std::sin(v - u);
  return {h * h, 5.0 * h - h * h, h * h};
}

MetricJet2 translation_jet(double u, double v) {
  const auto eval = jet_evaluator([](const Jet2& u, const Jet2& v) {
    const Jet2 h = 2.0 + sin(v - u);
    return std::array<Jet2, 3>{h * h, 5.0 * h - h * h, h * h};
  });
  return eval({u, v});
}

MetricJet2 sample_jet() {
  const auto eval = jet_evaluator([](const Jet2& u, const Jet2& v) {
    return std::array<Jet2, 3>{2.0 + sin(u * v), 0.3 * u - 0.2 * v * v, exp(0.4 * u) + v * v};
  });
  return eval({0.3, -0.4});
}

}  // namespace

TEST_CASE("flat jet has vanishing connection and curvature") {
  const MetricJet2 flat = constant_jet(1.0, 0.0, 1.0);
  const ChristoffelSymbols s = christoffel(flat);
  CHECK(s.G111 == 0.0);
  CHECK(s.G112 == 0.0);
  CHECK(s.G122 == 0.0);
  CHECK(s.G211 == 0.0);
  CHECK(s.G212 == 0.0);
  CHECK(s.G222 == 0.0);
  CHECK(gaussian_curvature(flat) == 0.0);
  for (double m : {-3.0, -1.0, 0.0, 0.5, 7.0}) CHECK(geodesic_slope_rhs(flat, m) == 0.0);
  CHECK(reduced_geodesic_coefficient(flat) == 0.0);
}

TEST_CASE("connection of the translation metric matches finite differences") {
  const MetricJet2 jet = translation_jet(0.0, 0.0);
  const auto ref = oracle::christoffel_by_solve(oracle::fd_jet(translation_metric, 0.0, 0.0, 1e-5));
  const ChristoffelSymbols s = christoffel(jet);
  const std::array<double, 6> got{s.G111, s.G112, s.G122, s.G211, s.G212, s.G222};
  for (int k = 0; k < 6; ++k) CHECK(std::abs(got[k] - ref[k]) < 1e-8);
}

TEST_CASE("second-kind symbols agree with a linear solve") {
  for (const MetricJet2& jet : {sample_jet(), translation_jet(0.2, 1.5)}) {
    const auto ref = oracle::christoffel_by_solve(jet);
    const ChristoffelSymbols s = christoffel(jet);
    const std::array<double, 6> got{s.G111, s.G112, s.G122, s.G211, s.G212, s.G222};
    for (int k = 0; k < 6; ++k) CHECK(std::abs(got[k] - ref[k]) < 1e-12 * (1.0 + std::abs(ref[k])));
  }
}

TEST_CASE("translation curvature matches the printed formula at s = 0") {
  // h = 2, h' = 1, h'' = 0 at s = 0.
  const double h = 2.0, h1 = 1.0, h2 = 0.0, f0 = 5.0;
  const double printed = h2 / (h * h * (f0 - 2 * h)) + (3 * h - f0) * h1 * h1 / (h * h * h * square(f0 - 2 * h));
  CHECK(std::abs(gaussian_curvature(translation_jet(0.0, 0.0)) - printed) < 1e-8);
  CHECK(std::abs(translation_family_curvature(Profile::trig(2.0, 1.0, 1.0, 0.0), 5.0, 0.0) - printed) < 1e-12);
}

TEST_CASE("curvature agrees with Brioschi on finite-difference jets") {
  for (double u : {-0.2, 0.1}) {
    for (double v : {1.4, 1.7}) {
      const double K = gaussian_curvature(translation_jet(u, v));
      const double ref = oracle::brioschi_curvature(oracle::fd_jet(translation_metric, u, v, 1e-4));
      CHECK(std::abs(K - ref) < 1e-6 * (1.0 + std::abs(ref)));
    }
  }
}

TEST_CASE("unit sphere in geodesic polar coordinates") {
  const auto eval = jet_evaluator([](const Jet2& u, const Jet2&) {
    return std::array<Jet2, 3>{Jet2(1.0), Jet2(0.0), square(sin(u))};
  });
  for (double u : {0.3, 1.0, 2.5}) CHECK(std::abs(gaussian_curvature(eval({u, 0.7})) - 1.0) < 1e-10);
}

TEST_CASE("slope equation reproduces the explicit connection") {
  const MetricJet2 jet = sample_jet();
  const auto s = oracle::christoffel_by_solve(jet);
  for (double m : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
    const double ref = oracle::slope_rhs(s, m);
    CHECK(std::abs(geodesic_slope_rhs(jet, m) - ref) < 1e-12 * (1.0 + std::abs(ref)));
  }
}

TEST_CASE("coordinate lines and the diagonal are geodesics of a web solution") {
  const MetricJet2 jet = translation_jet(0.0, 1.5);
  CHECK(std::abs(geodesic_slope_rhs(jet, 0.0)) < 1e-12);
  CHECK(std::abs(geodesic_slope_rhs(jet, -1.0)) < 1e-12);
  // u = const in the swapped chart is v = const there.
  CHECK(std::abs(geodesic_slope_rhs(swap_chart(jet), 0.0)) < 1e-12);
  const double K = reduced_geodesic_coefficient(translation_jet(0.0, 0.0));
  CHECK(std::abs(K - 0.5 * geodesic_slope_rhs(translation_jet(0.0, 0.0), 1.0)) < 1e-10);
}

TEST_CASE("reduced coefficient rejects jets off the web system") {
  CHECK_THROWS_AS(reduced_geodesic_coefficient(sample_jet()), Error);
  try {
    reduced_geodesic_coefficient(sample_jet());
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotWebAdapted);
  }
}

TEST_CASE("projective normal form of the dual chart") {
  for (int eps : {1, -1}) {
    const MetricField f = dual_metric_dim3(eps);
    for (double z : {1.2, 1.7}) {
      for (double m : {-1.5, 0.4, 2.0}) {
        const double ref = eps * m * m * m / (z * z * z);
        CHECK(std::abs(geodesic_slope_rhs(f.jet({z, 0.6}), m) - ref) < 1e-10 * (1.0 + std::abs(ref)));
      }
    }
  }
}

TEST_CASE("validation distinguishes degeneracy from indefiniteness") {
  try {
    validate_jet(constant_jet(1.0, 1.0, 1.0), SignatureMode::riemannian, {0.0, 0.0});
    FAIL("degenerate jet accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateMetric);
  }
  try {
    validate_jet(constant_jet(1.0, 2.0, 1.0), SignatureMode::riemannian, {0.5, 0.25});
    FAIL("indefinite jet accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PositivityViolation);
    REQUIRE(e.witness());
    CHECK(e.witness()->u == 0.5);
  }
  CHECK_NOTHROW(validate_jet(constant_jet(1.0, 2.0, 1.0), SignatureMode::pseudo, {0.0, 0.0}));
}

TEST_CASE("swapping the chart exchanges E and G") {
  const MetricJet2 m = sample_jet();
  const MetricJet2 s = swap_chart(m);
  CHECK(s.E == m.G);
  CHECK(s.G == m.E);
  CHECK(s.F == m.F);
  CHECK(s.Eu == m.Gv);
  CHECK(s.Gvv == m.Euu);
  CHECK(std::abs(gaussian_curvature(s) - gaussian_curvature(m)) < 1e-12);
}

TEST_CASE("interior grid is cell centred") {
  const Domain d{0.0, 1.0, 2.0, 4.0};
  const auto g = d.interior_grid(2, 2);
  REQUIRE(g.size() == 4);
  CHECK(g[0].u == doctest::Approx(0.25));
  CHECK(g[0].v == doctest::Approx(2.5));
  for (const auto& p : g) CHECK(d.contains(p));
}
