#pragma once

#include <array>
#include <complex>

#include "hexweb/chart_metric.hpp"

namespace hexweb {

struct HydroResidual {
  double r1 = 0, r2 = 0, r3 = 0;
  double max_abs() const;
};

HydroResidual hydro_residual(const MetricJet2& jet);

// Magnitude of the individual terms entering the residual; used to turn
// absolute residuals into relative ones.
double hydro_residual_scale(const MetricJet2& jet);

// Roots of G x^3 + (F - 2G) x^2 + (F - 2E) x + E, sorted by real part then
// imaginary part.
struct CharSpeeds {
  std::array<std::complex<double>, 3> lambda{};

  bool all_real(double tol = 1e-12) const;
  // Real parts; only meaningful when all_real().
  std::array<double, 3> real() const;
};

CharSpeeds characteristic_speeds(double E, double F, double G);
CharSpeeds characteristic_speeds(const MetricJet2& jet);

// |sum l_i l_j + sum l_i - 2 - 2 prod l_i|, relative to the largest term.
double lambdas_identity_residual(const CharSpeeds& s);
// Largest relative mismatch of the three Vieta relations.
double vieta_residual(double E, double F, double G, const CharSpeeds& s);

// The rational invariant attached to the speed pair (a, b); the third
// invariant uses (l1, l2) and the others follow cyclically.
template <class T>
T riemann_numerator(const T& a, const T& b) {
  const T n1 = 2.0 * a * b + b * b - a - 2.0 * b;
  const T n2 = 2.0 * a * b + a * a - 2.0 * a - b;
  return n1 * n1 * n2 * n2;
}

template <class T>
std::array<T, 5> riemann_denominator_factors(const T& a, const T& b) {
  return {2.0 * a * b - a - b - 1.0, a * b + a + b - 2.0, a * b - 2.0 * a - 2.0 * b + 1.0, 2.0 * a * b - a - b + 2.0,
          2.0 * a * a * b + 2.0 * a * b * b + 2.0 * (a + b) - 5.0 * a * b - a * a - b * b};
}

template <class T>
T riemann_denominator(const T& a, const T& b) {
  const auto f = riemann_denominator_factors(a, b);
  return f[0] * f[1] * f[2] * f[3] * f[4];
}

template <class T>
T riemann_invariant(const T& a, const T& b, const T& F) {
  return riemann_numerator(a, b) * F / riemann_denominator(a, b);
}

struct RiemannInvariants {
  double R1 = 0, R2 = 0, R3 = 0;
};

// Throws DenominatorBlowup naming the vanishing factor, ComplexSpeeds when
// the speeds are not all real.
RiemannInvariants riemann_invariants(double F, const CharSpeeds& speeds);
RiemannInvariants riemann_invariants(double F, const std::array<double, 3>& lambda);

// Checks the denominator factors of the pair (a, b) against their tolerance.
void check_riemann_denominators(double a, double b, int pair_index);

// Semi-Hamiltonian compatibility residual for indices i, j, k (0-based,
// pairwise distinct), with derivatives taken along the Riemann invariants.
// fd_step is the relative step of the outer finite difference.
double semi_hamiltonian_residual(const MetricField& field, const ChartPoint& p, int i, int j, int k,
                                 double fd_step = 1e-4);

}  // namespace hexweb
