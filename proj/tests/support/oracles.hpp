#pragma once

// Reference computations used only by tests.  They deliberately avoid the
// library's jets and closed forms: derivatives come from central differences,
// connection coefficients from a linear solve, curvature from Brioschi's
// formula.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <random>

#include "hexweb/chart_metric.hpp"

namespace oracle {

using MetricFn = std::function<std::array<double, 3>(double u, double v)>;

// Metric jet by central differences with step h (second derivatives use the
// standard three-point and four-point stencils).
inline hexweb::MetricJet2 fd_jet(const MetricFn& g, double u, double v, double h) {
  const auto c = g(u, v);
  const auto pu = g(u + h, v), mu = g(u - h, v), pv = g(u, v + h), mv = g(u, v - h);
  const auto pp = g(u + h, v + h), pm = g(u + h, v - h), mp = g(u - h, v + h), mm = g(u - h, v - h);
  std::array<double, 3> d_u{}, d_v{}, d_uu{}, d_uv{}, d_vv{};
  for (int k = 0; k < 3; ++k) {
    d_u[k] = (pu[k] - mu[k]) / (2 * h);
    d_v[k] = (pv[k] - mv[k]) / (2 * h);
    d_uu[k] = (pu[k] - 2 * c[k] + mu[k]) / (h * h);
    d_vv[k] = (pv[k] - 2 * c[k] + mv[k]) / (h * h);
    d_uv[k] = (pp[k] - pm[k] - mp[k] + mm[k]) / (4 * h * h);
  }
  hexweb::MetricJet2 m;
  m.E = c[0], m.F = c[1], m.G = c[2];
  m.Eu = d_u[0], m.Fu = d_u[1], m.Gu = d_u[2];
  m.Ev = d_v[0], m.Fv = d_v[1], m.Gv = d_v[2];
  m.Euu = d_uu[0], m.Fuu = d_uu[1], m.Guu = d_uu[2];
  m.Euv = d_uv[0], m.Fuv = d_uv[1], m.Guv = d_uv[2];
  m.Evv = d_vv[0], m.Fvv = d_vv[1], m.Gvv = d_vv[2];
  return m;
}

// Christoffel symbols Gamma^k_ij by solving g Gamma_ij = [ij] with the
// symbols of the first kind.  Returns {G111, G112, G122, G211, G212, G222}.
inline std::array<double, 6> christoffel_by_solve(const hexweb::MetricJet2& m) {
  Eigen::Matrix2d g;
  g << m.E, m.F, m.F, m.G;
  // First kind [ij, k] = (g_ik,j + g_jk,i - g_ij,k) / 2 for the pairs 11, 12, 22.
  const Eigen::Vector2d b11(0.5 * m.Eu, m.Fu - 0.5 * m.Ev);
  const Eigen::Vector2d b12(0.5 * m.Ev, 0.5 * m.Gu);
  const Eigen::Vector2d b22(m.Fv - 0.5 * m.Gu, 0.5 * m.Gv);
  const auto lu = g.fullPivLu();
  const Eigen::Vector2d s11 = lu.solve(b11), s12 = lu.solve(b12), s22 = lu.solve(b22);
  return {s11[0], s12[0], s22[0], s11[1], s12[1], s22[1]};
}

// Brioschi's formula for the Gaussian curvature.
inline double brioschi_curvature(const hexweb::MetricJet2& m) {
  Eigen::Matrix3d a, b;
  a << -0.5 * m.Evv + m.Fuv - 0.5 * m.Guu, 0.5 * m.Eu, m.Fu - 0.5 * m.Ev,  //
      m.Fv - 0.5 * m.Gu, m.E, m.F,                                          //
      0.5 * m.Gv, m.F, m.G;
  b << 0.0, 0.5 * m.Ev, 0.5 * m.Gu,  //
      0.5 * m.Ev, m.E, m.F,          //
      0.5 * m.Gu, m.F, m.G;
  const double W = m.E * m.G - m.F * m.F;
  return (a.determinant() - b.determinant()) / (W * W);
}

// d^2v/du^2 of the geodesic with slope m from explicit symbols.
inline double slope_rhs(const std::array<double, 6>& s, double m) {
  return s[2] * m * m * m + (2 * s[1] - s[5]) * m * m + (s[0] - 2 * s[4]) * m - s[3];
}

inline double cubic_value(double E, double F, double G, double x) {
  return ((G * x + (F - 2 * G)) * x + (F - 2 * E)) * x + E;
}

// Random symmetric positive-definite constant metric.
inline std::array<double, 3> random_spd(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> diag(0.5, 3.0), t(-0.9, 0.9);
  const double E = diag(rng), G = diag(rng);
  const double F = t(rng) * std::sqrt(E * G);
  return {E, F, G};
}

}  // namespace oracle
