#include "hexweb/hydro_system.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hexweb/errors.hpp"

namespace hexweb {

double HydroResidual::max_abs() const { return std::max({std::abs(r1), std::abs(r2), std::abs(r3)}); }

HydroResidual hydro_residual(const MetricJet2& m) {
  HydroResidual r;
  r.r1 = 2.0 * m.E * m.Fu - m.F * m.Eu - m.E * m.Ev;
  r.r2 = 2.0 * m.G * m.Fv - m.F * m.Gv - m.G * m.Gu;
  r.r3 = m.G * m.Eu + m.E * m.Gv - 2.0 * m.F * (m.Fu + m.Fv) + (3.0 * m.F - 2.0 * m.G) * m.Ev +
         (3.0 * m.F - 2.0 * m.E) * m.Gu;
  return r;
}

double hydro_residual_scale(const MetricJet2& m) {
  const double value = std::max({std::abs(m.E), std::abs(m.F), std::abs(m.G)});
  const double slope = std::max({std::abs(m.Eu), std::abs(m.Ev), std::abs(m.Fu), std::abs(m.Fv), std::abs(m.Gu),
                                 std::abs(m.Gv), 1e-300});
  return value * slope;
}

bool CharSpeeds::all_real(double tol) const {
  return std::all_of(lambda.begin(), lambda.end(),
                     [tol](const std::complex<double>& z) { return std::abs(z.imag()) <= tol * (1.0 + std::abs(z.real())); });
}

std::array<double, 3> CharSpeeds::real() const { return {lambda[0].real(), lambda[1].real(), lambda[2].real()}; }

namespace {

using cplx = std::complex<double>;

cplx poly(double G, double F, double E, cplx x) {
  return ((G * x + (F - 2.0 * G)) * x + (F - 2.0 * E)) * x + E;
}
cplx dpoly(double G, double F, double E, cplx x) { return (3.0 * G * x + 2.0 * (F - 2.0 * G)) * x + (F - 2.0 * E); }

}  // namespace

CharSpeeds characteristic_speeds(double E, double F, double G) {
  const double scale = std::max({std::abs(E), std::abs(F), std::abs(G)});
  if (!(std::abs(G) > 1e-12 * scale)) {
    throw Error(ErrorKind::LeadingCoefficientZero, "leading coefficient G vanishes; swap the chart");
  }
  const double a = (F - 2.0 * G) / G;
  const double b = (F - 2.0 * E) / G;
  const double c = E / G;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  const double shift = -a / 3.0;

  std::array<cplx, 3> roots;
  if (disc < 0.0) {
    const double r = std::sqrt(-p / 3.0);
    const double arg = std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0);
    const double phi = std::acos(arg);
    for (int k = 0; k < 3; ++k) {
      roots[k] = 2.0 * r * std::cos((phi - 2.0 * std::numbers::pi * k) / 3.0) + shift;
    }
  } else {
    const double sd = std::sqrt(disc);
    const double A = std::cbrt(-q / 2.0 + sd);
    const double B = std::cbrt(-q / 2.0 - sd);
    roots[0] = A + B + shift;
    roots[1] = cplx(-(A + B) / 2.0 + shift, std::sqrt(3.0) / 2.0 * (A - B));
    roots[2] = std::conj(roots[1]);
  }
  for (auto& x : roots) {
    for (int it = 0; it < 3; ++it) {
      const cplx d = dpoly(G, F, E, x);
      if (std::abs(d) == 0.0) break;
      const cplx step = poly(G, F, E, x) / d;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
      x -= step;
    }
    if (std::abs(x.imag()) <= 1e-14 * (1.0 + std::abs(x.real()))) x = x.real();
  }
  std::sort(roots.begin(), roots.end(), [](const cplx& l, const cplx& r) {
    if (l.real() != r.real()) return l.real() < r.real();
    return l.imag() < r.imag();
  });
  CharSpeeds s;
  s.lambda = roots;
  return s;
}

CharSpeeds characteristic_speeds(const MetricJet2& jet) { return characteristic_speeds(jet.E, jet.F, jet.G); }

double lambdas_identity_residual(const CharSpeeds& s) {
  const auto& l = s.lambda;
  const cplx pair_sum = l[0] * l[1] + l[1] * l[2] + l[2] * l[0];
  const cplx sum = l[0] + l[1] + l[2];
  const cplx prod = l[0] * l[1] * l[2];
  const cplx res = pair_sum + sum - 2.0 - 2.0 * prod;
  double scale = 2.0;
  for (int i = 0; i < 3; ++i) {
    scale = std::max(scale, std::abs(l[i]));
    scale = std::max(scale, std::abs(l[i] * l[(i + 1) % 3]));
  }
  scale = std::max(scale, 2.0 * std::abs(prod));
  return std::abs(res) / scale;
}

double vieta_residual(double E, double F, double G, const CharSpeeds& s) {
  const auto& l = s.lambda;
  const cplx sum = l[0] + l[1] + l[2];
  const cplx pair_sum = l[0] * l[1] + l[1] * l[2] + l[2] * l[0];
  const cplx prod = l[0] * l[1] * l[2];
  const double e1 = (2.0 * G - F) / G, e2 = (F - 2.0 * E) / G, e3 = -E / G;
  return std::max({std::abs(sum - e1) / std::max(1.0, std::abs(e1)), std::abs(pair_sum - e2) / std::max(1.0, std::abs(e2)),
                   std::abs(prod - e3) / std::max(1.0, std::abs(e3))});
}

void check_riemann_denominators(double a, double b, int pair_index) {
  const double big = std::max(std::abs(a), std::abs(b));
  const double tol = 1e-8 * std::pow(1.0 + big, 4);
  const auto f = riemann_denominator_factors(a, b);
  for (int i = 0; i < 5; ++i) {
    if (!(std::abs(f[i]) > tol)) {
      std::ostringstream os;
      os << "denominator factor " << (i + 1) << " of invariant R" << pair_index << " vanishes";
      throw Error(ErrorKind::DenominatorBlowup, os.str());
    }
  }
}

RiemannInvariants riemann_invariants(double F, const std::array<double, 3>& l) {
  check_riemann_denominators(l[1], l[2], 1);
  check_riemann_denominators(l[2], l[0], 2);
  check_riemann_denominators(l[0], l[1], 3);
  RiemannInvariants r;
  r.R1 = riemann_invariant(l[1], l[2], F);
  r.R2 = riemann_invariant(l[2], l[0], F);
  r.R3 = riemann_invariant(l[0], l[1], F);
  return r;
}

RiemannInvariants riemann_invariants(double F, const CharSpeeds& speeds) {
  if (!speeds.all_real(1e-10)) throw Error(ErrorKind::ComplexSpeeds, "Riemann invariants need real speeds");
  return riemann_invariants(F, speeds.real());
}

namespace {

// Hodograph-space quantities at Z = (E, F, G).
struct HodographState {
  Eigen::Vector3d lambda;
  Eigen::Vector3d R;
  Eigen::Matrix3d dlam_dZ;  // row i: gradient of lambda_i
  Eigen::Matrix3d dR_dZ;    // row k: gradient of R_k
};

HodographState hodograph_state(const Eigen::Vector3d& Z) {
  const double E = Z[0], F = Z[1], G = Z[2];
  const CharSpeeds s = characteristic_speeds(E, F, G);
  if (!s.all_real(1e-10)) throw Error(ErrorKind::ComplexSpeeds, "complex characteristic speeds");
  const auto l = s.real();
  HodographState st;
  for (int i = 0; i < 3; ++i) {
    const double x = l[i];
    const double dp = (3.0 * G * x + 2.0 * (F - 2.0 * G)) * x + (F - 2.0 * E);
    st.lambda[i] = x;
    st.dlam_dZ(i, 0) = -(1.0 - 2.0 * x) / dp;
    st.dlam_dZ(i, 1) = -(x * x + x) / dp;
    st.dlam_dZ(i, 2) = -(x * x * x - 2.0 * x * x) / dp;
  }
  const int pairs[3][2] = {{1, 2}, {2, 0}, {0, 1}};
  for (int k = 0; k < 3; ++k) {
    const int a = pairs[k][0], b = pairs[k][1];
    check_riemann_denominators(l[a], l[b], k + 1);
    const Jet3 R = riemann_invariant(Jet3::variable(l[a], 0), Jet3::variable(l[b], 1), Jet3::variable(F, 2));
    st.R[k] = R.value();
    Eigen::RowVector3d grad = R.d(0) * st.dlam_dZ.row(a) + R.d(1) * st.dlam_dZ.row(b);
    grad[1] += R.d(2);
    st.dR_dZ.row(k) = grad;
  }
  return st;
}

Eigen::Vector3d solve_for_invariants(const Eigen::Vector3d& target, Eigen::Vector3d Z) {
  for (int it = 0; it < 50; ++it) {
    const HodographState st = hodograph_state(Z);
    const Eigen::Vector3d res = st.R - target;
    if (res.norm() <= 1e-15 * (1.0 + target.norm())) return Z;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(st.dR_dZ);
    if (!lu.isInvertible()) throw Error(ErrorKind::NonInvertibleInvariantChart, "invariant map singular");
    const Eigen::Vector3d step = lu.solve(res);
    Z -= step;
    if (step.norm() <= 1e-15 * (1.0 + Z.norm())) return Z;
  }
  return Z;
}

// g_ij = (d lambda_i / d R_j) / (lambda_j - lambda_i).
double connection_coefficient(const HodographState& st, int i, int j) {
  const Eigen::Matrix3d dlam_dR = st.dlam_dZ * st.dR_dZ.inverse();
  return dlam_dR(i, j) / (st.lambda[j] - st.lambda[i]);
}

double derivative_along(const Eigen::Vector3d& Z0, const HodographState& st0, int i, int j, int k, double rel_step) {
  const double h = rel_step * std::max(std::abs(st0.R[k]), 1e-3 * st0.R.cwiseAbs().maxCoeff());
  Eigen::Vector3d tp = st0.R, tm = st0.R;
  tp[k] += h;
  tm[k] -= h;
  const HodographState sp = hodograph_state(solve_for_invariants(tp, Z0));
  const HodographState sm = hodograph_state(solve_for_invariants(tm, Z0));
  return (connection_coefficient(sp, i, j) - connection_coefficient(sm, i, j)) / (2.0 * h);
}

}  // namespace

double semi_hamiltonian_residual(const MetricField& field, const ChartPoint& p, int i, int j, int k, double fd_step) {
  if (i == j || j == k || i == k || i < 0 || j < 0 || k < 0 || i > 2 || j > 2 || k > 2) {
    throw Error(ErrorKind::InvalidArgument, "indices i, j, k must be distinct and in {0, 1, 2}");
  }
  const MetricJet2 m = field.jet(p);
  const Eigen::Vector3d Z(m.E, m.F, m.G);
  const HodographState st = hodograph_state(Z);

  const double tol = 1e-8 * (1.0 + st.lambda.cwiseAbs().maxCoeff());
  if (std::abs(st.lambda[j] - st.lambda[i]) < tol || std::abs(st.lambda[k] - st.lambda[i]) < tol) {
    throw Error(ErrorKind::CoincidingSpeeds, "characteristic speeds coincide", Witness{p.u, p.v});
  }

  // The field must sweep out a two-dimensional piece of hodograph space.
  const Eigen::Vector3d Ru = st.dR_dZ * Eigen::Vector3d(m.Eu, m.Fu, m.Gu);
  const Eigen::Vector3d Rv = st.dR_dZ * Eigen::Vector3d(m.Ev, m.Fv, m.Gv);
  const double area = Ru.cross(Rv).norm();
  if (!(area > 1e-6 * Ru.norm() * Rv.norm()) || Ru.norm() == 0.0 || Rv.norm() == 0.0) {
    throw Error(ErrorKind::NonInvertibleInvariantChart, "Riemann invariants have rank below two on the chart",
                Witness{p.u, p.v});
  }

  return derivative_along(Z, st, i, j, k, fd_step) - derivative_along(Z, st, i, k, j, fd_step);
}

}  // namespace hexweb
