#include "hexweb/duality.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "hexweb/parallel.hpp"

namespace hexweb {

namespace {

void check_eps(int eps) {
  if (eps != 1 && eps != -1) throw Error(ErrorKind::InvalidArgument, "eps must be +1 or -1");
}

double rel(double residual, std::initializer_list<double> terms) {
  double s = 1.0;
  for (double t : terms) s = std::max(s, std::abs(t));
  return std::abs(residual) / s;
}

// Coefficients of the quadratic in t = 1/P whose roots are the geodesics
// through (z, y) with duals on the plane.
template <class T>
std::array<T, 3> section_quadratic(const PlaneSection& pl, int eps, const T& z, const T& y) {
  const T z2 = z * z;
  const T alpha = -pl.a + pl.b * y - pl.c * y * y;
  const T beta = -pl.b * z + 2.0 * pl.c * z * y;
  const T gamma = (eps * pl.a - eps * pl.b * y + eps * pl.c * y * y) / z2 - pl.c * z2 + pl.delta;
  return {alpha, beta, gamma};
}

std::string where(double z, double y) {
  std::ostringstream os;
  os << "(z, y) = (" << z << ", " << y << ")";
  return os.str();
}

// The slope of the given root branch (sign = +1 or -1) at (z, y).
Jet2 section_slope(const PlaneSection& pl, int eps, double sign, const Jet2& z, const Jet2& y) {
  const auto q = section_quadratic(pl, eps, z, y);
  const Jet2 disc = q[1] * q[1] - 4.0 * q[0] * q[2];
  const double scale = std::max({std::abs(q[1].value() * q[1].value()), std::abs(4.0 * q[0].value() * q[2].value()), 1e-300});
  if (!(disc.value() > 1e-12 * scale))
    throw Error(ErrorKind::NoRealIntersection, "plane misses the pencil at " + where(z.value(), y.value()),
                Witness{z.value(), y.value()});
  if (std::abs(q[0].value()) < 1e-12 * (std::abs(pl.a) + std::abs(pl.b) + std::abs(pl.c)))
    throw Error(ErrorKind::SlopeAmbiguity, "a section geodesic is tangent to the special family at " +
                                               where(z.value(), y.value()),
                Witness{z.value(), y.value()});
  const Jet2 t = (-1.0 * q[1] + sign * sqrt(disc)) / (2.0 * q[0]);
  if (std::abs(t.value()) < 1e-12)
    throw Error(ErrorKind::SlopeAmbiguity, "vertical section geodesic at " + where(z.value(), y.value()),
                Witness{z.value(), y.value()});
  return 1.0 / t;
}

// Branch labels stay consistent across the chart only while the quadratic
// stays non-degenerate and its leading coefficient keeps its sign.
void check_branches(const PlaneSection& pl, int eps, const Domain& d, int n) {
  double sign0 = 0.0;
  std::vector<ChartPoint> pts = d.interior_grid(n, n);
  for (const ChartPoint& c : {ChartPoint{d.u0, d.v0}, ChartPoint{d.u0, d.v1}, ChartPoint{d.u1, d.v0}, ChartPoint{d.u1, d.v1}})
    pts.push_back(c);
  for (const ChartPoint& p : pts) {
    const Jet2 z(p.u), y(p.v);
    section_slope(pl, eps, 1.0, z, y);
    section_slope(pl, eps, -1.0, z, y);
    const double a = section_quadratic(pl, eps, p.u, p.v)[0];
    if (sign0 == 0.0) sign0 = a > 0 ? 1.0 : -1.0;
    if ((a > 0 ? 1.0 : -1.0) != sign0)
      throw Error(ErrorKind::SlopeAmbiguity, "slope branches exchange across the chart near " + where(p.u, p.v),
                  Witness{p.u, p.v});
  }
}

double grid_max(const SlopeTriple& t, int n, ChartPoint* witness,
                const std::function<double(const SlopeTriple&, double, double)>& f) {
  const std::vector<ChartPoint> pts = t.domain.interior_grid(n, n);
  std::vector<double> r(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { r[i] = f(t, pts[i].u, pts[i].v); });
  std::size_t k = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  if (witness) *witness = pts[k];
  return r[k];
}

}  // namespace

DualPoint normalized(const DualPoint& p) {
  const double m = std::max({std::abs(p.A), std::abs(p.B), std::abs(p.C), std::abs(p.D)});
  if (m == 0.0) throw Error(ErrorKind::InvalidArgument, "zero dual point");
  return {p.A / m, p.B / m, p.C / m, p.D / m};
}

double quadric_residual(const DualPoint& p, int eps) {
  const DualPoint n = normalized(p);
  return n.A * n.C - n.B * n.B + eps * n.D * n.D;
}

DualPoint geodesic_to_dual(const ConicGeodesic& g, int eps) {
  check_eps(eps);
  if (g.special) return normalized({1.0, -g.l, g.l * g.l, 0.0});
  // Expand k^2 (y - l)^2 - k z^2 - eps = 0 into A y^2 + 2 B y + C + D z^2.
  const double k2 = g.k * g.k;
  return normalized({k2, -k2 * g.l, k2 * g.l * g.l - eps, -g.k});
}

DualPoint slope_to_dual(double z, double y, double P, int eps) {
  check_eps(eps);
  const double t = 1.0 / P, z2 = z * z;
  return {-t * t + eps / z2, -z * t + y * t * t - eps * y / z2, -z2 + 2.0 * z * y * t - y * y * t * t + eps * y * y / z2,
          1.0};
}

double dual_to_slope(double z, double y, const DualPoint& p) {
  if (p.D == 0.0) return 0.0;  // special geodesic y = const
  // With D = 1, B + y A = -z / P.
  const double s = (p.B + y * p.A) / p.D;
  if (s == 0.0) throw Error(ErrorKind::SlopeAmbiguity, "vertical geodesic at " + where(z, y), Witness{z, y});
  return -z / s;
}

SlopeTriple web_from_planes(int eps, const PlaneSection& plane, const Domain& domain) {
  return web_from_two_planes(eps, plane, plane, domain);
}

SlopeTriple web_from_two_planes(int eps, const PlaneSection& plane_p, const PlaneSection& plane_q,
                                const Domain& domain) {
  check_eps(eps);
  for (const PlaneSection* pl : {&plane_p, &plane_q}) {
    if (pl->delta == 0.0) throw Error(ErrorKind::InvalidArgument, "web-defining plane must differ from D = 0");
  }
  if (!(domain.u0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "dual chart needs z > 0");
  check_branches(plane_p, eps, domain, 10);
  check_branches(plane_q, eps, domain, 10);
  SlopeTriple t;
  t.slopes = [plane_p, plane_q, eps](const Jet2& z, const Jet2& y) {
    return std::array<Jet2, 3>{section_slope(plane_p, eps, 1.0, z, y), section_slope(plane_q, eps, -1.0, z, y),
                               Jet2(0.0)};
  };
  t.domain = domain;
  t.regime = DualRegime::dim3;
  t.eps = eps;
  return t;
}

SlopeTriple with_slope_factor(const SlopeTriple& t, int index, std::function<Jet2(const Jet2&, const Jet2&)> factor) {
  if (index < 0 || index > 2) throw Error(ErrorKind::InvalidArgument, "slope index out of range");
  SlopeTriple r = t;
  const auto inner = t.slopes;
  r.slopes = [inner, index, factor](const Jet2& z, const Jet2& y) {
    auto s = inner(z, y);
    s[index] = s[index] * factor(z, y);
    return s;
  };
  return r;
}

double geodesic_pde_residual(const SlopeTriple& t, double z, double y) {
  const auto s = t.at(z, y);
  double worst = 0.0;
  for (const Jet2& P : s) {
    const double p = P.value(), pz = P.d(0), py = P.d(1);
    if (t.regime == DualRegime::dim3) {
      const double z3 = z * z * z;
      worst = std::max(worst, rel(z3 * (pz + p * py) - t.eps * p * p * p, {z3 * pz, z3 * p * py, p * p * p}));
    } else {
      worst = std::max(worst, rel(z * (pz + p * py) - t.rho * p - t.eps * p * p * p, {z * pz, z * p * py, t.rho * p, p * p * p}));
    }
  }
  return worst;
}

double hexagonality_residual(const SlopeTriple& t, double z, double y) {
  const auto s = t.at(z, y);
  double yy = 0, ppy = 0, sum = 0, cube = 0;
  double mag = 0;
  for (const Jet2& P : s) {
    const double p = P.value(), py = P.d(1), pyy = P.dd(1, 1);
    yy += pyy;
    ppy += p * py;
    sum += p;
    cube += p * p * p;
    mag = std::max({mag, std::abs(pyy), std::abs(p * py), std::abs(p), std::abs(p * p * p)});
  }
  const int e = t.eps;
  if (t.regime == DualRegime::dim3) {
    const double z3 = z * z * z, z4 = z3 * z, z6 = z3 * z3;
    const double r = yy - 3.0 * e * ppy / z3 - 3.0 * e * sum / z4 + cube / z6;
    return rel(r, {mag, 3.0 * mag / z3, 3.0 * mag / z4, mag / z6});
  }
  const double r = yy - 3.0 * e * ppy / z + (cube + e * (t.rho - 1.0) * sum) / (z * z);
  return rel(r, {mag, 3.0 * mag / z, mag * (1.0 + std::abs(t.rho - 1.0)) / (z * z)});
}

double max_geodesic_pde_residual(const SlopeTriple& t, int n, ChartPoint* witness) {
  return grid_max(t, n, witness, geodesic_pde_residual);
}

double max_hexagonality_residual(const SlopeTriple& t, int n, ChartPoint* witness) {
  return grid_max(t, n, witness, hexagonality_residual);
}

PfaffReport pfaff_consistency(const SlopeTriple& t, int n) {
  const std::vector<ChartPoint> pts = t.domain.interior_grid(n, n);
  std::vector<std::array<double, 5>> res(pts.size());
  const double e = t.eps;
  parallel_for(pts.size(), [&](std::size_t i) {
    const double z = pts[i].u, y = pts[i].v;
    std::array<double, 5>& r = res[i];
    try {
      const auto s = t.at(z, y);
      const double P = s[0].value(), Q = s[1].value();
      const double Pz = s[0].d(0), Py = s[0].d(1), Qz = s[1].d(0), Qy = s[1].d(1);
      const double Pyz = s[0].dd(0, 1), Pyy = s[0].dd(1, 1);
      const double z2 = z * z, z3 = z2 * z, z6 = z3 * z3;
      const double w = (e * P * P - z2) * (e * P * P - z2);

      const double pz = e * P * P * P / z3 - P * Py;
      const double qz = Q * Q * Py / P - Q * (e * P * P * Q + z2 * P + z2 * Q) / (z3 * P);
      const double qy = (P + Q) * (e * P * Q + z2) / (z3 * P) - Q * Py / P;
      const double t1 = Py * Py * (P - 3.0 * Q) / (Q - P), t2 = (4.0 * e * P * P * Q + z2 * P + 3.0 * z2 * Q) * Py / (z3 * (Q - P)),
                   t3 = (P + Q) * w / (z6 * (P - Q));
      const double u1 = 2.0 * Q * Py * Py / (P * (Q - P)),
                   u2 = (3.0 * e * P * P * P + e * P * P * Q + z2 * P + 3.0 * z2 * Q) * Py / (z3 * P * (P - Q)),
                   u3 = (P + Q) * w / (z6 * P * (Q - P));
      r[0] = rel(Pz - pz, {Pz, pz});
      r[1] = rel(Qz - qz, {Qz, qz});
      r[2] = rel(Qy - qy, {Qy, qy});
      r[3] = rel(Pyz - (t1 + t2 + t3), {Pyz, t1, t2, t3});
      r[4] = rel(Pyy - (u1 + u2 + u3), {Pyy, u1, u2, u3});
      for (double& x : r)
        if (!std::isfinite(x)) x = INFINITY;
    } catch (const Error&) {
      r.fill(INFINITY);
    }
  });
  PfaffReport rep;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int k = 0; k < 5; ++k) {
      rep.per_relation[k] = std::max(rep.per_relation[k], res[i][k]);
      if (res[i][k] > rep.max_residual) {
        rep.max_residual = res[i][k];
        rep.witness = pts[i];
      }
    }
  }
  return rep;
}

PlaneSection plane_group_action(const PlaneSection& pl, double t1, double t2, double t3) {
  PlaneSection p = pl;
  // G1
  p = {p.a + t1 * p.b + t1 * t1 * p.c, p.b + 2.0 * t1 * p.c, p.c, p.delta};
  // G2
  p = {std::exp(t2) * p.a, p.b, std::exp(-t2) * p.c, p.delta};
  // G3
  p = {p.a, p.b + 2.0 * t3 * p.a, p.c + t3 * p.b + t3 * t3 * p.a, p.delta};
  return p;
}

std::array<double, 2> orbit_invariant(const PlaneSection& pl) {
  if (pl.a == 0.0 && pl.b == 0.0 && pl.c == 0.0 && pl.delta == 0.0)
    throw Error(ErrorKind::InvalidArgument, "zero plane");
  double m1 = 4.0 * pl.a * pl.c - pl.b * pl.b, m2 = pl.delta * pl.delta;
  const double n = std::hypot(m1, m2);
  if (n == 0.0) return {0.0, 0.0};
  m1 /= n;
  m2 /= n;
  if (m1 < 0.0 || (m1 == 0.0 && m2 < 0.0)) m1 = -m1, m2 = -m2;
  return {m1 + 0.0, m2 + 0.0};
}

double projective_distance(const std::array<double, 2>& x, const std::array<double, 2>& y) {
  const double nx = std::hypot(x[0], x[1]), ny = std::hypot(y[0], y[1]);
  if (nx == 0.0 || ny == 0.0) return nx == ny ? 0.0 : 1.0;
  return std::abs(x[0] * y[1] - x[1] * y[0]) / (nx * ny);
}

SlopeTriple dim2_web(double rho, int eps, double P0, double z0, const Domain& domain) {
  check_eps(eps);
  if (std::abs(rho - 1.0) < 1e-12 || std::abs(rho + 0.5) < 1e-12)
    throw Error(ErrorKind::ExcludedRho, "rho = 1 and rho = -1/2 give constant curvature");
  if (P0 == 0.0) throw Error(ErrorKind::ZeroInitialSlope, "P0 must be non-zero");
  if (!(domain.u0 > 0.0) || !(z0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "dim-2 chart needs z > 0");
  // w = P^-2 solves the linear equation z w' = -2 (rho w + eps).
  const double w0 = 1.0 / (P0 * P0);
  const double C = rho != 0.0 ? (w0 + eps / rho) * std::pow(z0, 2.0 * rho) : w0 + 2.0 * eps * std::log(z0);
  const double sign = P0 > 0 ? 1.0 : -1.0;
  auto w_of = [rho, eps, C](const Jet2& z) {
    if (rho != 0.0) return -eps / rho + C * pow(z, -2.0 * rho);
    return C - 2.0 * eps * log(z);
  };
  for (int k = 0; k <= 64; ++k) {
    const double z = domain.u0 + (domain.u1 - domain.u0) * k / 64.0;
    if (!(w_of(Jet2(z)).value() > 0.0)) {
      std::ostringstream os;
      os << "slope blows up at z = " << z;
      throw Error(ErrorKind::DomainExit, os.str(), Witness{z, domain.v0});
    }
  }
  SlopeTriple t;
  t.slopes = [w_of, sign](const Jet2& z, const Jet2&) {
    const Jet2 P = sign / sqrt(w_of(z));
    return std::array<Jet2, 3>{P, -1.0 * P, Jet2(0.0)};
  };
  t.domain = domain;
  t.regime = DualRegime::dim2;
  t.eps = eps;
  t.rho = rho;
  return t;
}

std::optional<double> constant_slope_web(double rho, int eps) {
  check_eps(eps);
  if (!(eps * rho < 0.0)) return std::nullopt;
  return std::sqrt(-eps * rho);
}

std::vector<DualPoint> sample_dual_curve(const SlopeTriple& t, int index, int n) {
  if (index < 0 || index > 2) throw Error(ErrorKind::InvalidArgument, "slope index out of range");
  std::vector<DualPoint> out;
  for (const ChartPoint& p : t.domain.interior_grid(n, n)) {
    const double P = t.at(p.u, p.v)[index].value();
    if (P == 0.0) {
      out.push_back(normalized({1.0, -p.v, p.v * p.v, 0.0}));
    } else {
      out.push_back(normalized(slope_to_dual(p.u, p.v, P, t.eps)));
    }
  }
  return out;
}

PlaneFit best_fit_plane(const std::vector<DualPoint>& pts) {
  if (pts.size() < 3) throw Error(ErrorKind::InvalidArgument, "need at least three points for a plane");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(pts.size()), 4);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const DualPoint n = normalized(pts[i]);
    const double len = std::sqrt(n.A * n.A + n.B * n.B + n.C * n.C + n.D * n.D);
    M.row(static_cast<Eigen::Index>(i)) << n.A / len, n.B / len, n.C / len, n.D / len;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Eigen::Vector4d v = svd.matrixV().col(3);
  PlaneFit fit;
  fit.plane = {v(0), v(1), v(2), v(3)};
  fit.residual = sv(0) > 0.0 ? sv(3) / sv(0) : 0.0;
  return fit;
}

double plane_incidence_residual(const PlaneSection& pl, const std::vector<DualPoint>& pts) {
  const double pn = std::sqrt(pl.a * pl.a + pl.b * pl.b + pl.c * pl.c + pl.delta * pl.delta);
  if (pn == 0.0) throw Error(ErrorKind::InvalidArgument, "zero plane");
  double worst = 0.0;
  for (const DualPoint& p : pts) {
    const DualPoint n = normalized(p);
    const double len = std::sqrt(n.A * n.A + n.B * n.B + n.C * n.C + n.D * n.D);
    worst = std::max(worst, std::abs(pl.a * n.A + pl.b * n.B + pl.c * n.C + pl.delta * n.D) / (pn * len));
  }
  return worst;
}

MetricField dual_metric_dim3(int eps, const Domain& domain) {
  check_eps(eps);
  MetricField f(jet_evaluator([eps](const Jet2& z, const Jet2&) {
                  const Jet2 z2 = z * z;
                  return std::array<Jet2, 3>{0.5 * z2 * z2, Jet2(0.0), -0.5 * eps * z2};
                }),
                domain, FamilyTag::dual_dim3, eps < 0 ? SignatureMode::riemannian : SignatureMode::pseudo, "dual_dim3");
  f.set_parameter("eps", eps);
  return f;
}

MetricField dual_metric_dim2(double rho, int eps, const Domain& domain) {
  check_eps(eps);
  if (rho == 0.0) throw Error(ErrorKind::InvalidArgument, "this normal form needs rho != 0");
  const double c = eps / rho;
  MetricField f(jet_evaluator([rho, c](const Jet2& z, const Jet2&) {
                  const Jet2 s = pow(z, -2.0 * rho);
                  return std::array<Jet2, 3>{s, Jet2(0.0), c * s};
                }),
                domain, FamilyTag::dual_dim2, c > 0 ? SignatureMode::riemannian : SignatureMode::pseudo, "dual_dim2");
  f.set_parameter("eps", eps);
  f.set_parameter("rho", rho);
  return f;
}

Web3Field to_web(const SlopeTriple& t) {
  return web_from_slopes(t.slopes, t.domain,
                         t.regime == DualRegime::dim3 ? WebProvenance::dual_dim3 : WebProvenance::dual_dim2);
}

}  // namespace hexweb
