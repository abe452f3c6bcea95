#include "hexweb/web3.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hexweb/errors.hpp"
#include "hexweb/parallel.hpp"

namespace hexweb {

const char* to_string(WebProvenance p) {
  switch (p) {
    case WebProvenance::from_integral: return "from_integral";
    case WebProvenance::coordinate_web: return "coordinate_web";
    case WebProvenance::dual_dim3: return "dual_dim3";
    case WebProvenance::dual_dim2: return "dual_dim2";
    case WebProvenance::custom: return "custom";
  }
  return "custom";
}

Web3Field::Web3Field(Evaluator eval, Domain domain, WebProvenance provenance)
    : eval_(std::move(eval)), domain_(domain), provenance_(provenance) {}

std::array<Slope, 3> Web3Field::slopes(const ChartPoint& p) const {
  const auto dirs = eval_(p);
  std::array<Slope, 3> out;
  for (int i = 0; i < 3; ++i) {
    const double a = dirs[i].alpha.value(), b = dirs[i].beta.value();
    if (std::abs(b) <= 1e-14 * std::abs(a)) {
      out[i] = {0.0, true};
    } else {
      out[i] = {-a / b, false};
    }
  }
  return out;
}

Web3Field Web3Field::permuted(const std::array<int, 3>& order) const {
  Evaluator inner = eval_;
  return Web3Field([inner, order](const ChartPoint& p) {
    const auto d = inner(p);
    return std::array<Direction, 3>{d[order[0]], d[order[1]], d[order[2]]};
  }, domain_, provenance_);
}

Web3Field Web3Field::with_slope_factor(int index, std::function<Jet2(const Jet2&, const Jet2&)> factor) const {
  if (index < 0 || index > 2) throw Error(ErrorKind::InvalidArgument, "foliation index must be 0, 1 or 2");
  Evaluator inner = eval_;
  return Web3Field([inner, index, factor](const ChartPoint& p) {
    auto d = inner(p);
    d[index].alpha = d[index].alpha * factor(Jet2::variable(p.u, 0), Jet2::variable(p.v, 1));
    return d;
  }, domain_, WebProvenance::custom);
}

Web3Field Web3Field::with_bilinear_slope_perturbation(int index, double amplitude) const {
  const ChartPoint c = domain_.center();
  return with_slope_factor(index, [c, amplitude](const Jet2& u, const Jet2& v) {
    return exp(amplitude * ((u - c.u) * (v - c.v)));
  });
}

int Web3Field::most_oblique_foliation() const {
  const auto d = eval_(domain_.center());
  int best = 0;
  double score = -1.0;
  for (int i = 0; i < 3; ++i) {
    const double a = d[i].alpha.value(), b = d[i].beta.value();
    const double s = std::abs(a * b) / (a * a + b * b);
    if (s > score) {
      score = s;
      best = i;
    }
  }
  return best;
}

Web3Field coordinate_web(const Domain& domain) {
  return Web3Field([](const ChartPoint&) {
    return std::array<Direction, 3>{Direction{Jet2(1.0), Jet2(0.0)}, Direction{Jet2(0.0), Jet2(1.0)},
                                    Direction{Jet2(1.0), Jet2(1.0)}};
  }, domain, WebProvenance::coordinate_web);
}

Web3Field web_from_slopes(std::function<std::array<Jet2, 3>(const Jet2&, const Jet2&)> slopes, const Domain& domain,
                          WebProvenance provenance) {
  return Web3Field([slopes](const ChartPoint& p) {
    const auto m = slopes(Jet2::variable(p.u, 0), Jet2::variable(p.v, 1));
    std::array<Direction, 3> d;
    // The covector is only defined up to scale; dividing by a steep slope
    // keeps the jets of nearly vertical leaves well conditioned.
    for (int i = 0; i < 3; ++i) {
      d[i] = std::abs(m[i].value()) > 1.0 ? Direction{Jet2(-1.0), 1.0 / m[i]} : Direction{-m[i], Jet2(1.0)};
    }
    return d;
  }, domain, provenance);
}

namespace {

template <class T>
T cubic_in_angle(const std::array<T, 4>& K, const T& c, const T& s) {
  return K[0] * (c * c * c) + K[1] * (c * c * s) + K[2] * (c * s * s) + K[3] * (s * s * s);
}

double cubic_value(const std::array<double, 4>& K, double th) {
  return cubic_in_angle<double>(K, std::cos(th), std::sin(th));
}

double cubic_slope(const std::array<double, 4>& K, double th) {
  const double c = std::cos(th), s = std::sin(th);
  // d/dth of the cubic; dc = -s, ds = c.
  return K[0] * (-3 * c * c * s) + K[1] * (-2 * c * s * s + c * c * c) + K[2] * (-s * s * s + 2 * c * c * s) +
         K[3] * (3 * s * s * c);
}

}  // namespace

BinaryCubicRoots binary_cubic_roots(const std::array<double, 4>& K_in, double root_tol) {
  double scale = 0.0;
  for (double k : K_in) scale = std::max(scale, std::abs(k));
  if (scale == 0.0) throw Error(ErrorKind::RepeatedRoots, "cubic form vanishes identically");
  std::array<double, 4> K;
  for (int i = 0; i < 4; ++i) K[i] = K_in[i] / scale;
  const double a = K[0], b = K[1], c = K[2], d = K[3];
  const double disc = b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d + 18 * a * b * c * d;
  BinaryCubicRoots out;
  out.discriminant = disc;
  if (disc < -root_tol) throw Error(ErrorKind::ComplexRoots, "cubic form has a complex pair of roots");
  if (disc <= root_tol) throw Error(ErrorKind::RepeatedRoots, "cubic form has a repeated root");

  constexpr int kSamples = 720;
  constexpr double kShift = 0.0123456789;
  std::vector<double> found;
  double th0 = kShift, f0 = cubic_value(K, th0);
  for (int k = 1; k <= kSamples && found.size() < 3; ++k) {
    const double th1 = kShift + std::numbers::pi * k / kSamples;
    const double f1 = cubic_value(K, th1);
    if ((f0 < 0.0) != (f1 < 0.0) || f1 == 0.0) {
      double lo = th0, hi = th1, flo = f0;
      for (int it = 0; it < 60 && hi - lo > 1e-4; ++it) {
        const double mid = 0.5 * (lo + hi), fm = cubic_value(K, mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      double th = 0.5 * (lo + hi);
      for (int it = 0; it < 8; ++it) {
        const double step = cubic_value(K, th) / cubic_slope(K, th);
        if (!std::isfinite(step)) break;
        th = std::clamp(th - step, lo, hi);
      }
      found.push_back(std::fmod(th, std::numbers::pi));
    }
    th0 = th1;
    f0 = f1;
  }
  if (found.size() != 3) throw Error(ErrorKind::RepeatedRoots, "could not separate three real roots");
  std::sort(found.begin(), found.end());
  out.angle = {found[0], found[1], found[2]};
  return out;
}

namespace {

// Leaf directions of the integral at x, unordered, each with its leaf angle
// in [0, pi).
std::array<std::pair<double, Direction>, 3> integral_directions(const MetricField& f, const CubicForm& form,
                                                                const ChartPoint& x) {
  const CubicForm::Coefficients Kj = form.coefficients(x);
  const std::array<double, 4> Kv = {Kj[0].value(), Kj[1].value(), Kj[2].value(), Kj[3].value()};
  BinaryCubicRoots roots;
  try {
    roots = binary_cubic_roots(Kv);
  } catch (const Error& e) {
    throw Error(e.kind(), e.detail(), Witness{x.u, x.v});
  }
  const MetricJets m = as_jets(f.jet(x));
  std::array<std::pair<double, Direction>, 3> dirs;
  for (int r = 0; r < 3; ++r) {
    const double th0 = roots.angle[r];
    const double fprime = cubic_slope(Kv, th0);
    Jet2 th(th0);
    for (int it = 0; it < 3; ++it) th = th - cubic_in_angle<Jet2>(Kj, cos(th), sin(th)) / fprime;
    const Jet2 p = cos(th), q = sin(th);
    const Jet2 xi = m.G * p - m.F * q;
    const Jet2 eta = m.E * q - m.F * p;
    double psi = std::atan2(eta.value(), xi.value());
    if (psi < 0.0) psi += std::numbers::pi;
    if (psi >= std::numbers::pi) psi -= std::numbers::pi;
    dirs[r] = {psi, Direction{-eta, xi}};
  }
  return dirs;
}

}  // namespace

Web3Field web_from_cubic_integral(const MetricField& field, const CubicForm& I) {
  const MetricField f = field;
  const CubicForm form = I;
  // Foliations are ordered by leaf angle measured from a cut placed in the
  // widest gap between the three directions at the centre, so the labels do
  // not jump where a leaf direction sits on a fixed cut.
  const auto c = integral_directions(f, form, field.domain().center());
  std::array<double, 3> a = {c[0].first, c[1].first, c[2].first};
  std::sort(a.begin(), a.end());
  double cut = 0.0, widest = -1.0;
  for (int i = 0; i < 3; ++i) {
    const double lo = a[i], hi = i == 2 ? a[0] + std::numbers::pi : a[i + 1];
    if (hi - lo > widest) {
      widest = hi - lo;
      cut = 0.5 * (lo + hi);
    }
  }
  return Web3Field([f, form, cut](const ChartPoint& x) {
    auto dirs = integral_directions(f, form, x);
    for (auto& d : dirs) {
      d.first = std::fmod(d.first - cut, std::numbers::pi);
      if (d.first < 0.0) d.first += std::numbers::pi;
    }
    std::sort(dirs.begin(), dirs.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    return std::array<Direction, 3>{dirs[0].second, dirs[1].second, dirs[2].second};
  }, field.domain(), WebProvenance::from_integral);
}

namespace {

double cross_value(const Direction& a, const Direction& b) {
  return a.alpha.value() * b.beta.value() - a.beta.value() * b.alpha.value();
}

double norm_value(const Direction& a) { return std::hypot(a.alpha.value(), a.beta.value()); }

void check_transversal(const std::array<Direction, 3>& d, const ChartPoint& p) {
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const double s = std::abs(cross_value(d[i], d[j])) / (norm_value(d[i]) * norm_value(d[j]));
    if (!(s > kTransversalityTol)) {
      throw Error(ErrorKind::NonTransversal, "web foliations are not transverse", Witness{p.u, p.v});
    }
  }
}

Jet2 cross(const Direction& a, const Direction& b) { return a.alpha * b.beta - a.beta * b.alpha; }

}  // namespace

// Normalise the covectors to theta_i = a_i omega_i with theta_1 + theta_2 +
// theta_3 = 0, then solve d theta_i = gamma ^ theta_i for the connection form.
ChernData blaschke_curvature(const Web3Field& web, const ChartPoint& p) {
  const auto w = web.directions(p);
  check_transversal(w, p);
  const Jet2 a1 = cross(w[1], w[2]), a2 = cross(w[2], w[0]);
  const Jet2 P1 = a1 * w[0].alpha, Q1 = a1 * w[0].beta;
  const Jet2 P2 = a2 * w[1].alpha, Q2 = a2 * w[1].beta;
  const Jet2 c1 = Q1.partial(0) - P1.partial(1);
  const Jet2 c2 = Q2.partial(0) - P2.partial(1);
  // g1 Q_i - g2 P_i = c_i, i = 1, 2.
  const Jet2 det = P1 * Q2 - P2 * Q1;
  const Jet2 g1 = (P1 * c2 - P2 * c1) / det;
  const Jet2 g2 = (Q1 * c2 - Q2 * c1) / det;
  ChernData out;
  out.Gamma_u = g1.value();
  out.Gamma_v = g2.value();
  out.K_B = g2.d(0) - g1.d(1);
  return out;
}

double max_blaschke_curvature(const Web3Field& web, int n_u, int n_v, ChartPoint* witness) {
  const auto grid = web.domain().interior_grid(n_u, n_v);
  std::vector<double> kb(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { kb[i] = std::abs(blaschke_curvature(web, grid[i]).K_B); });
  const auto it = std::max_element(kb.begin(), kb.end());
  if (witness && it != kb.end()) *witness = grid[static_cast<std::size_t>(it - kb.begin())];
  return it == kb.end() ? 0.0 : *it;
}

namespace {

std::array<double, 2> unit_tangent(const Web3Field& web, int index, double u, double v) {
  const auto d = web.directions({u, v});
  const double tu = d[index].beta.value(), tv = -d[index].alpha.value();
  const double n = std::hypot(tu, tv);
  return {tu / n, tv / n};
}

}  // namespace

OdePath<2> follow_leaf(const Web3Field& web, int index, const ChartPoint& p, double length,
                       const IntegratorConfig& cfg) {
  if (index < 0 || index > 2) throw Error(ErrorKind::InvalidArgument, "foliation index must be 0, 1 or 2");
  const std::array<double, 2> ref = unit_tangent(web, index, p.u, p.v);
  using S = std::array<double, 2>;
  const Domain& d = web.domain();
  // Trial stages of the last step may poke outside the chart, where the
  // underlying field need not exist; they see the nearest chart point and the
  // step is then cut by the exit test.
  auto rhs = [&web, &d, index, ref](double, const S& x) {
    S t = unit_tangent(web, index, std::clamp(x[0], d.u0, d.u1), std::clamp(x[1], d.v0, d.v1));
    if (t[0] * ref[0] + t[1] * ref[1] < 0.0) t = {-t[0], -t[1]};
    return t;
  };
  auto inside = [&d](const S& x) { return d.contains({x[0], x[1]}); };
  return integrate_path<2>(rhs, S{p.u, p.v}, 0.0, length, cfg, inside);
}

namespace {

struct LeafEnd {
  ChartPoint x;
  std::array<double, 2> tangent;
};

LeafEnd leaf_end(const Web3Field& web, int index, const ChartPoint& p, double length, const IntegratorConfig& cfg) {
  const std::array<double, 2> ref = unit_tangent(web, index, p.u, p.v);
  const OdePath<2> path = follow_leaf(web, index, p, length, cfg);
  if (path.status == Termination::domain_exit) {
    throw Error(ErrorKind::DomainExit, "hexagon leaf leaves the chart", Witness{p.u, p.v});
  }
  if (path.status == Termination::step_failure) throw Error(ErrorKind::StepFailure, "leaf integration failed");
  const auto& e = path.x.back();
  std::array<double, 2> t = unit_tangent(web, index, e[0], e[1]);
  if (t[0] * ref[0] + t[1] * ref[1] < 0.0) t = {-t[0], -t[1]};
  return {{e[0], e[1]}, t};
}

// Point where the leaf of foliation j through x meets the leaf of foliation k
// through o.
ChartPoint leaf_intersection(const Web3Field& web, int j, const ChartPoint& x, int k, const ChartPoint& o,
                             const IntegratorConfig& cfg) {
  const auto tj = unit_tangent(web, j, x.u, x.v);
  const auto tk = unit_tangent(web, k, o.u, o.v);
  Eigen::Matrix2d J;
  J << tj[0], -tk[0], tj[1], -tk[1];
  Eigen::Vector2d st = J.fullPivLu().solve(Eigen::Vector2d(o.u - x.u, o.v - x.v));
  for (int it = 0; it < 30; ++it) {
    const LeafEnd a = leaf_end(web, j, x, st[0], cfg);
    const LeafEnd b = leaf_end(web, k, o, st[1], cfg);
    const Eigen::Vector2d r(a.x.u - b.x.u, a.x.v - b.x.v);
    J << a.tangent[0], -b.tangent[0], a.tangent[1], -b.tangent[1];
    const Eigen::Vector2d step = J.fullPivLu().solve(r);
    st -= step;
    if (step.norm() < 1e-15 * (1.0 + st.norm())) break;
  }
  return leaf_end(web, j, x, st[0], cfg).x;
}

}  // namespace

double hexagon_closure_defect(const MetricField& field, const Web3Field& web, const ChartPoint& p0, double eps,
                              const IntegratorConfig& cfg) {
  validate(cfg);
  check_transversal(web.directions(p0), p0);
  const ChartPoint a1 = leaf_end(web, 0, p0, eps, cfg).x;
  // Alternate: foliation 2 to leaf 3 of p0, 1 to leaf 2, 3 to leaf 1, twice.
  const int moves[6][2] = {{1, 2}, {0, 1}, {2, 0}, {1, 2}, {0, 1}, {2, 0}};
  ChartPoint x = a1;
  for (const auto& mv : moves) x = leaf_intersection(web, mv[0], x, mv[1], p0, cfg);
  const MetricJet2 g = field.jet(a1);
  const double du = x.u - a1.u, dv = x.v - a1.v;
  return std::sqrt(std::abs(g.E * du * du + 2.0 * g.F * du * dv + g.G * dv * dv));
}

std::vector<Polyline> sample_leaves(const Web3Field& web, int leaves_per_foliation, const IntegratorConfig& cfg) {
  const Domain& d = web.domain();
  const ChartPoint c = d.center();
  const double wu = d.u1 - d.u0, wv = d.v1 - d.v0;
  const double reach = 2.0 * std::hypot(wu, wv);
  std::vector<Polyline> out;
  for (int i = 0; i < 3; ++i) {
    const auto t = unit_tangent(web, i, c.u, c.v);
    // Seed along whichever diagonal is more transverse to the leaves.
    const double s_main = std::abs(t[0] * wv - t[1] * wu);
    const double s_anti = std::abs(t[0] * (-wv) - t[1] * wu);
    const double sign = s_main >= s_anti ? 1.0 : -1.0;
    for (int k = 0; k < leaves_per_foliation; ++k) {
      const double f = (k + 0.5) / leaves_per_foliation - 0.5;
      const ChartPoint seed{c.u + f * wu * 0.98, c.v + sign * f * wv * 0.98};
      Polyline line;
      line.foliation = i;
      const OdePath<2> back = follow_leaf(web, i, seed, -reach, cfg);
      const OdePath<2> fwd = follow_leaf(web, i, seed, reach, cfg);
      for (std::size_t n = back.x.size(); n-- > 1;) line.points.push_back({back.x[n][0], back.x[n][1]});
      for (const auto& x : fwd.x) line.points.push_back({x[0], x[1]});
      out.push_back(std::move(line));
    }
  }
  return out;
}

double geodesic_leaf_residual(const MetricField& field, const Web3Field& web, const ChartPoint& p, int index) {
  const Direction d = web.directions(p)[index];
  const MetricJet2 g = field.jet(p);
  if (std::abs(d.beta.value()) >= std::abs(d.alpha.value())) {
    const Jet2 m = -d.alpha / d.beta;
    return m.d(0) + m.value() * m.d(1) - geodesic_slope_rhs(g, m.value());
  }
  // Near-vertical leaf: use du/dv in the swapped chart.
  const Jet2 n = -d.beta / d.alpha;
  return n.d(1) + n.value() * n.d(0) - geodesic_slope_rhs(swap_chart(g), n.value());
}

}  // namespace hexweb
