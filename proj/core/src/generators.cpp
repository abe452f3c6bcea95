#include "hexweb/generators.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "hexweb/hydro_system.hpp"

namespace hexweb {

namespace {

// Lift a dense sample (value, first, second derivative in s) onto a jet of s.
Jet2 compose(const Jet2& s, double y, double dy, double ddy) { return s.chain(y, dy, ddy); }

void check_positive_on_grid(const MetricField& field, int n) {
  for (const ChartPoint& p : field.domain().interior_grid(n, n)) validate_jet(field.jet(p), field.signature(), p);
  const Domain& d = field.domain();
  for (const ChartPoint& p : {ChartPoint{d.u0, d.v0}, ChartPoint{d.u0, d.v1}, ChartPoint{d.u1, d.v0}, ChartPoint{d.u1, d.v1}})
    validate_jet(field.jet(p), field.signature(), p);
}

std::string fmt_s(double s) {
  std::ostringstream os;
  os << "s = " << s;
  return os.str();
}

void check_ode_positivity(double s, double e, double j, double f, SignatureMode mode) {
  if (mode != SignatureMode::riemannian) return;
  if (!(e > 0.0) || !(j > 0.0) || !(e * j - f * f > 0.0))
    throw Error(ErrorKind::PositivityViolation, "metric loses positivity at " + fmt_s(s));
}

}  // namespace

Profile::Profile(Kind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {
  const std::size_t need = kind == Kind::constant ? 1 : kind == Kind::trig ? 4 : kind == Kind::exp ? 3 : 1;
  if (params_.size() < need) throw Error(ErrorKind::InvalidArgument, "profile needs more parameters");
}

const char* to_string(Profile::Kind k) {
  switch (k) {
    case Profile::Kind::constant: return "constant";
    case Profile::Kind::poly: return "poly";
    case Profile::Kind::trig: return "trig";
    case Profile::Kind::exp: return "exp";
  }
  return "?";
}

const char* to_string(OdeFamilySpec::Constraint c) {
  switch (c) {
    case OdeFamilySpec::Constraint::none: return "none";
    case OdeFamilySpec::Constraint::a: return "a";
    case OdeFamilySpec::Constraint::b: return "b";
    case OdeFamilySpec::Constraint::c: return "c";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Translation family

MetricField make_translation_family(const TranslationFamilySpec& spec) {
  if (spec.f0 == 0.0) throw Error(ErrorKind::InvalidArgument, "translation family needs f0 != 0");
  const Profile h = spec.h;
  const double f0 = spec.f0;
  MetricField field(jet_evaluator([h, f0](const Jet2& u, const Jet2& v) {
                      const Jet2 hs = h(v - u);
                      const Jet2 h2 = hs * hs;
                      return std::array<Jet2, 3>{h2, f0 * hs - h2, h2};
                    }),
                    spec.domain, FamilyTag::translation, spec.mode, "translation");
  field.set_parameter("f0", f0);
  // Positivity is a property of s = v - u alone; sample the s-range finely.
  const Domain& d = spec.domain;
  const double s_lo = d.v0 - d.u1, s_hi = d.v1 - d.u0;
  const int n = 400;
  for (int k = 0; k <= n; ++k) {
    const double s = s_lo + (s_hi - s_lo) * k / n;
    const double hv = h(s);
    const double E = hv * hv, F = f0 * hv - hv * hv;
    const double W = E * E - F * F;
    const bool bad = spec.mode == SignatureMode::riemannian ? !(E > 0.0 && W > 0.0) : !(std::abs(W) > 0.0);
    if (bad) {
      // A chart point on the offending line v - u = s.
      const double lo = std::max(d.u0, d.v0 - s), hi = std::min(d.u1, d.v1 - s);
      const double u = 0.5 * (lo + hi);
      throw Error(ErrorKind::PositivityViolation, "translation family not admissible at " + fmt_s(s), Witness{u, u + s});
    }
  }
  return field;
}

double translation_family_curvature(const Profile& h, double f0, double s) {
  const Jet2 hs = h(Jet2::variable(s, 0));
  const double hv = hs.value(), h1 = hs.d(0), h2 = hs.dd(0, 0);
  const double g = f0 - 2.0 * hv;
  return h2 / (hv * hv * g) + (3.0 * hv - f0) * h1 * h1 / (hv * hv * hv * g * g);
}

KappaClass classify_translation_kappa(double kappa) {
  const double tol = 1e-12;
  return {std::abs(kappa - 1.0) < tol || std::abs(kappa + 0.5) < tol || std::abs(kappa + 2.0) < tol};
}

// ---------------------------------------------------------------------------
// Spiral and dilation families

double spiral_delta(double k, double e, double j, double f) {
  return -j * k * k * k + (f - 2.0 * j) * k * k + (2.0 * e - f) * k + e;
}

double spiral_family_curvature(double k, double u, double e, double j, double f) {
  const double d = spiral_delta(k, e, j, f);
  const double a = j * (2.0 * f - j), b = e * (2.0 * f - e);
  const double k2 = k * k, k3 = k2 * k, k4 = k3 * k;
  return k * (k + 1.0) * (a * k4 + 2.0 * a * k3 - 2.0 * b * k - b) / (4.0 * std::exp(u) * d * d * d);
}

double dilation_branch_curvature(OdeFamilySpec::Constraint c, double s, double e, double j, double f) {
  const double q = (j * s + f) * (j * s + f);
  switch (c) {
    case OdeFamilySpec::Constraint::a: return -j / q;
    case OdeFamilySpec::Constraint::b: return -e / ((s + 2.0) * (s + 2.0) * q);
    case OdeFamilySpec::Constraint::c: return (2.0 * f - e - j) / ((s - 1.0) * (s - 1.0) * q);
    case OdeFamilySpec::Constraint::none: break;
  }
  throw Error(ErrorKind::InvalidArgument, "no constant-curvature branch selected");
}

double dilation_constraint_residual(OdeFamilySpec::Constraint c, double s, double e, double j, double f) {
  switch (c) {
    case OdeFamilySpec::Constraint::a: return (2.0 * f - j) * s * s + (2.0 * s + 1.0) * e;
    case OdeFamilySpec::Constraint::b: return (s * s + 2.0 * s) * j + 2.0 * f - e;
    case OdeFamilySpec::Constraint::c: return j * s * s - e;
    case OdeFamilySpec::Constraint::none: return 0.0;
  }
  return 0.0;
}

namespace {

void validate_ode_spec(const OdeFamilySpec& spec) {
  if (!(spec.node_spacing > 0.0)) throw Error(ErrorKind::InvalidArgument, "node spacing must be positive");
  validate(spec.ode);
  const Domain& d = spec.domain;
  if (!(d.u0 < d.u1 && d.v0 < d.v1)) throw Error(ErrorKind::InvalidArgument, "empty domain");
}

std::pair<double, double> s_range(const OdeFamilySpec& spec, double lo, double hi) {
  lo = std::min(lo, spec.s0);
  hi = std::max(hi, spec.s0);
  if (spec.s_interval) {
    lo = std::min(lo, spec.s_interval->first);
    hi = std::max(hi, spec.s_interval->second);
  }
  const double pad = 1e-9 * (1.0 + std::abs(lo) + std::abs(hi));
  return {lo - pad, hi + pad};
}

template <class T>
T delta_of(double k, const T& e, const T& j, const T& f) {
  return -1.0 * j * (k * k * k) + (f - 2.0 * j) * (k * k) + (2.0 * e - f) * k + e;
}

template <class T>
T dilation_delta(const T& s, const T& e, const T& j, const T& f) {
  return -1.0 * j * s * s * s + (f - 2.0 * j) * s * s + (2.0 * e - f) * s + e;
}

double delta_scale(double e, double j, double f, double k) {
  const double m = std::max({std::abs(e), std::abs(j), std::abs(f)});
  return 1e-8 * m * std::pow(1.0 + std::abs(k), 3);
}

}  // namespace

MetricField make_spiral_family(const OdeFamilySpec& spec) {
  validate_ode_spec(spec);
  const double k = spec.kappa;
  const Domain& d = spec.domain;
  // s = v - k u is extremal at the corners.
  const double c[4] = {d.v0 - k * d.u0, d.v0 - k * d.u1, d.v1 - k * d.u0, d.v1 - k * d.u1};
  const auto [s_lo, s_hi] = s_range(spec, *std::min_element(c, c + 4), *std::max_element(c, c + 4));

  if (std::abs(spiral_delta(k, spec.e0, spec.j0, spec.f0)) <= delta_scale(spec.e0, spec.j0, spec.f0, k))
    throw Error(ErrorKind::DeltaVanished, "singular initial data at " + fmt_s(spec.s0));
  check_ode_positivity(spec.s0, spec.e0, spec.j0, spec.f0, spec.mode);

  auto rhs = [k](const auto&, const auto& y) {
    using T = std::decay_t<decltype(y[0])>;
    const T& e = y[0];
    const T& j = y[1];
    const T& f = y[2];
    const T dl = delta_of(k, e, j, f);
    const T de = (k + 1.0) * e * (f - k * j) / dl;
    const T dj = j * (-1.0 * j * (k * k) + (2.0 * f - 2.0 * j) * k + e) / dl;
    const T df = (-2.0 * f * j * (k * k) + (2.0 * f * f - 3.0 * f * j + j * e) * k + e * (f + j)) / (2.0 * dl);
    return std::array<T, 3>{de, dj, df};
  };
  const SignatureMode mode = spec.mode;
  auto guard = [k, mode](double s, const std::array<double, 3>& y) {
    if (std::abs(spiral_delta(k, y[0], y[1], y[2])) <= delta_scale(y[0], y[1], y[2], k))
      throw Error(ErrorKind::DeltaVanished, "singular line reached at " + fmt_s(s));
    check_ode_positivity(s, y[0], y[1], y[2], mode);
  };
  auto ode = std::make_shared<DenseOde<3>>(rhs, spec.s0, std::array<double, 3>{spec.e0, spec.j0, spec.f0}, s_lo, s_hi,
                                           spec.node_spacing, spec.ode, guard);

  MetricField field(jet_evaluator([ode, k](const Jet2& u, const Jet2& v) {
                      const Jet2 s = v - k * u;
                      const auto smp = (*ode)(s.value());
                      const Jet2 scale = exp(u);
                      return std::array<Jet2, 3>{scale * compose(s, smp.y[0], smp.dy[0], smp.ddy[0]),
                                                 scale * compose(s, smp.y[2], smp.dy[2], smp.ddy[2]),
                                                 scale * compose(s, smp.y[1], smp.dy[1], smp.ddy[1])};
                    }),
                    spec.domain, FamilyTag::spiral, spec.mode, "spiral");
  field.set_parameter("kappa", k);
  field.set_parameter("s_min", ode->lo());
  field.set_parameter("s_max", ode->hi());
  return field;
}

MetricField make_dilation_family(const OdeFamilySpec& spec) {
  validate_ode_spec(spec);
  const Domain& d = spec.domain;
  if (!(d.u0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "dilation family needs u > 0 on the domain");
  const double c[4] = {d.v0 / d.u0, d.v0 / d.u1, d.v1 / d.u0, d.v1 / d.u1};
  const auto [s_lo, s_hi] = s_range(spec, *std::min_element(c, c + 4), *std::max_element(c, c + 4));
  const SignatureMode mode = spec.mode;

  if (spec.degenerate_branch) {
    // Determinant identically zero: kappa = 0 and e is algebraic in (s, j, f).
    for (double bad : {1.0, -0.5, -2.0})
      if (s_lo <= bad && bad <= s_hi)
        throw Error(ErrorKind::InvalidArgument, "s-interval meets a singular value of the degenerate branch");
    auto e_of = [](const auto& s, const auto& j, const auto& f) {
      return s * (j * s * s + (2.0 * j - f) * s + f) / (2.0 * s + 1.0);
    };
    auto rhs = [](const auto& s, const auto& y) {
      using T = std::decay_t<decltype(y[0])>;
      const T& j = y[0];
      const T& f = y[1];
      const T P = 4.0 * j * s * s * s + (7.0 * j - 2.0 * f) * s * s + (4.0 * j - 2.0 * f) * s + f;
      const T g = j * s + f;
      const T den = (s - 1.0) * (2.0 * s + 1.0) * (s + 2.0) * g * g;
      const T common = (j * s + 2.0 * j - 3.0 * f) * P / den;
      return std::array<T, 2>{2.0 * j * common, (f - j * s) * common};
    };
    auto guard = [mode, e_of](double s, const std::array<double, 2>& y) {
      const double g = y[0] * s + y[1];
      if (std::abs(g) <= 1e-8 * (std::abs(y[0]) + std::abs(y[1])))
        throw Error(ErrorKind::DeltaVanished, "singular line reached at " + fmt_s(s));
      check_ode_positivity(s, e_of(s, y[0], y[1]), y[0], y[1], mode);
    };
    auto ode = std::make_shared<DenseOde<2>>(rhs, spec.s0, std::array<double, 2>{spec.j0, spec.f0}, s_lo, s_hi,
                                             spec.node_spacing, spec.ode, guard);
    MetricField field(jet_evaluator([ode, e_of](const Jet2& u, const Jet2& v) {
                        const Jet2 s = v / u;
                        const auto smp = (*ode)(s.value());
                        const Jet2 j = compose(s, smp.y[0], smp.dy[0], smp.ddy[0]);
                        const Jet2 f = compose(s, smp.y[1], smp.dy[1], smp.ddy[1]);
                        return std::array<Jet2, 3>{e_of(s, j, f), f, j};
                      }),
                      spec.domain, FamilyTag::dilation, spec.mode, "dilation_degenerate");
    field.set_parameter("kappa", 0.0);
    field.set_parameter("s_min", ode->lo());
    field.set_parameter("s_max", ode->hi());
    return field;
  }

  const double k = spec.kappa;
  const auto constraint = spec.constraint;
  double e0 = spec.e0;
  if (constraint != OdeFamilySpec::Constraint::none) {
    if (std::abs(k + 2.0) > 1e-12)
      throw Error(ErrorKind::InvalidArgument, "constant-curvature branches need kappa = -2");
    const double s = spec.s0, j = spec.j0, f = spec.f0;
    switch (constraint) {
      case OdeFamilySpec::Constraint::a:
        if (std::abs(2.0 * s + 1.0) < 1e-12) throw Error(ErrorKind::InvalidArgument, "constraint a singular at s0");
        e0 = -(2.0 * f - j) * s * s / (2.0 * s + 1.0);
        break;
      case OdeFamilySpec::Constraint::b: e0 = (s * s + 2.0 * s) * j + 2.0 * f; break;
      case OdeFamilySpec::Constraint::c: e0 = j * s * s; break;
      case OdeFamilySpec::Constraint::none: break;
    }
  }
  check_ode_positivity(spec.s0, e0, spec.j0, spec.f0, mode);
  auto delta_small = [](double s, double e, double j, double f) {
    const double m = std::max({std::abs(e), std::abs(j), std::abs(f)});
    return std::abs(dilation_delta(s, e, j, f)) <= 1e-8 * m * std::pow(1.0 + std::abs(s), 3);
  };
  if (delta_small(spec.s0, e0, spec.j0, spec.f0))
    throw Error(ErrorKind::DeltaVanished, "singular initial data at " + fmt_s(spec.s0));

  auto rhs = [k](const auto& s, const auto& y) {
    using T = std::decay_t<decltype(y[0])>;
    const T& e = y[0];
    const T& j = y[1];
    const T& f = y[2];
    const T dl = dilation_delta(T(s), e, j, f);
    const T de = k * (s + 1.0) * e * (f - j * s) / dl;
    const T dj = k * j * (-1.0 * j * s * s + (2.0 * f - 2.0 * j) * s + e) / dl;
    const T df =
        k * (-2.0 * f * j * s * s + (2.0 * f * f - 3.0 * f * j + j * e) * s + e * (f + j)) / (2.0 * dl);
    return std::array<T, 3>{de, dj, df};
  };
  auto guard = [mode, delta_small, constraint](double s, const std::array<double, 3>& y) {
    if (delta_small(s, y[0], y[1], y[2])) throw Error(ErrorKind::DeltaVanished, "singular line reached at " + fmt_s(s));
    check_ode_positivity(s, y[0], y[1], y[2], mode);
    if (constraint != OdeFamilySpec::Constraint::none) {
      const double scale = std::max({std::abs(y[0]), std::abs(y[1]), std::abs(y[2])}) * (1.0 + s * s);
      if (std::abs(dilation_constraint_residual(constraint, s, y[0], y[1], y[2])) > 1e-8 * scale)
        throw Error(ErrorKind::ConstraintDrift, "constraint " + std::string(to_string(constraint)) +
                                                    " no longer holds at " + fmt_s(s));
    }
  };
  auto ode = std::make_shared<DenseOde<3>>(rhs, spec.s0, std::array<double, 3>{e0, spec.j0, spec.f0}, s_lo, s_hi,
                                           spec.node_spacing, spec.ode, guard);
  MetricField field(jet_evaluator([ode, k](const Jet2& u, const Jet2& v) {
                      const Jet2 s = v / u;
                      const auto smp = (*ode)(s.value());
                      const Jet2 scale = pow(u, k);
                      return std::array<Jet2, 3>{scale * compose(s, smp.y[0], smp.dy[0], smp.ddy[0]),
                                                 scale * compose(s, smp.y[2], smp.dy[2], smp.ddy[2]),
                                                 scale * compose(s, smp.y[1], smp.dy[1], smp.ddy[1])};
                    }),
                    spec.domain, FamilyTag::dilation, spec.mode, "dilation");
  field.set_parameter("kappa", k);
  field.set_parameter("s_min", ode->lo());
  field.set_parameter("s_max", ode->hi());
  if (constraint != OdeFamilySpec::Constraint::none)
    field.set_parameter("constraint", static_cast<double>(static_cast<int>(constraint)));
  return field;
}

// ---------------------------------------------------------------------------
// Simple waves

namespace {

template <class T>
T step1_denominator(const T& l2, const T& l3) {
  return l2 + l3 + 1.0 - 2.0 * l2 * l3;
}

template <class T>
T lambda1_of(const T& l2, const T& l3) {
  return (2.0 - l2 * l3 - l2 - l3) / step1_denominator(l2, l3);
}

// F from the first invariant, given the pair (l2, l3).
template <class T>
T flux_of(double c1, const T& l2, const T& l3) {
  return c1 * riemann_denominator(l2, l3) / riemann_numerator(l2, l3);
}

// Eliminant whose root in l2 enforces the second invariant.
template <class T>
T eliminant(double c1, double c2, const T& l2, const T& l3) {
  return riemann_invariant(l3, lambda1_of(l2, l3), flux_of(c1, l2, l3)) - c2;
}

template <class T>
struct WaveState {
  T l1, l2, l3, F, R3;
};

class SimpleWaveSolver {
 public:
  explicit SimpleWaveSolver(const SimpleWaveSpec& spec) : spec_(spec) {
    if (std::abs(step1_denominator(spec.lambda2_ref, spec.lambda3_ref)) < 1e-12)
      throw Error(ErrorKind::LinearSolveSingular, "step-1 denominator vanishes at the seed");
    if (!(spec.bracket_halfwidth > 0.0)) throw Error(ErrorKind::InvalidArgument, "bracket half-width must be positive");
    // Slope of the root curve l2(l3) at the seed, from the implicit function
    // theorem on the eliminant.
    const Jet2 phi = eliminant(spec.c1, spec.c2, Jet2::variable(spec.lambda2_ref, 0), Jet2::variable(spec.lambda3_ref, 1));
    slope_ = phi.d(0) != 0.0 ? -phi.d(1) / phi.d(0) : 0.0;
  }

  double lambda2_root(double l3) const {
    const double c1 = spec_.c1, c2 = spec_.c2;
    auto phi = [&](double l2) { return eliminant(c1, c2, l2, l3); };
    const double pred = spec_.lambda2_ref + slope_ * (l3 - spec_.lambda3_ref);
    double w = spec_.bracket_halfwidth;
    double a = 0, b = 0, fa = 0;
    bool found = false;
    for (int expand = 0; expand < 6 && !found; ++expand, w *= 2.0) {
      // Scan the bracket in pieces so a nearby pole does not masquerade as a root.
      const int pieces = 16;
      double best = INFINITY;
      for (int i = 0; i < pieces; ++i) {
        const double x0 = pred - w + 2.0 * w * i / pieces, x1 = pred - w + 2.0 * w * (i + 1) / pieces;
        const double f0 = phi(x0), f1 = phi(x1);
        if (!std::isfinite(f0) || !std::isfinite(f1) || (f0 > 0) == (f1 > 0)) continue;
        const double dist = std::abs(0.5 * (x0 + x1) - pred);
        if (dist < best) {
          best = dist;
          a = x0, b = x1, fa = f0;
          found = true;
        }
      }
    }
    if (!found) throw Error(ErrorKind::NoRoot, "eliminant has no sign change near the predicted speed");
    for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      const double fm = phi(m);
      if ((fm > 0) == (fa > 0)) {
        a = m, fa = fm;
      } else {
        b = m;
      }
    }
    double x = 0.5 * (a + b);
    for (int it = 0; it < 3; ++it) {
      const Jet<1> j = eliminant(c1, c2, Jet<1>::variable(x, 0), Jet<1>(l3));
      if (j.d(0) == 0.0) break;
      const double nx = x - j.value() / j.d(0);
      if (!(nx >= a - (b - a) && nx <= b + (b - a))) break;
      x = nx;
    }
    const double res = std::abs(phi(x));
    if (!(res <= 1e-10 * (1.0 + std::abs(c2)))) throw Error(ErrorKind::NoRoot, "bracketed point is a pole, not a root");
    if (std::abs(step1_denominator(x, l3)) < 1e-12)
      throw Error(ErrorKind::LinearSolveSingular, "step-1 denominator vanishes along the wave");
    return x;
  }

  // All wave quantities as functions of a (possibly jet-valued) l3, using the
  // value-level root to seed a jet Newton iteration for l2.
  template <class T>
  WaveState<T> state(const T& l3) const {
    const double l3v = value_of(l3);
    const double r = lambda2_root(l3v);
    const double dphi = eliminant(spec_.c1, spec_.c2, Jet<1>::variable(r, 0), Jet<1>(l3v)).d(0);
    if (dphi == 0.0) throw Error(ErrorKind::NewtonDiverged, "eliminant is stationary at its root");
    T l2(r);
    for (int it = 0; it < 3; ++it) l2 = l2 - eliminant(spec_.c1, spec_.c2, l2, l3) / dphi;
    WaveState<T> s;
    s.l2 = l2;
    s.l3 = l3;
    s.l1 = lambda1_of(l2, l3);
    s.F = flux_of(spec_.c1, l2, l3);
    s.R3 = riemann_invariant(s.l1, s.l2, s.F);
    return s;
  }

  // Hopf relation (or the frozen third invariant for a constant profile).
  template <class T, class U>
  T hopf(const T& l3, const U& u, const U& v) const {
    const WaveState<T> s = state(l3);
    if (spec_.profile.kind() == Profile::Kind::constant) return s.R3 - spec_.profile.params()[0];
    return l3 * u + v - spec_.profile(s.R3);
  }

  double solve_lambda3(double u, double v) const {
    double x = spec_.lambda3_ref;
    const double scale = 1.0 + std::abs(v) + std::abs(u * x);
    for (int it = 0; it < 100; ++it) {
      const Jet<1> h = hopf(Jet<1>::variable(x, 0), Jet<1>(u), Jet<1>(v));
      if (!std::isfinite(h.value()) || h.d(0) == 0.0) break;
      // Clamped so one step cannot leave the neighbourhood of the seed.
      const double step = std::clamp(h.value() / h.d(0), -0.02, 0.02);
      x -= step;
      if (std::abs(step) < 1e-14 * (1.0 + std::abs(x))) {
        const double res = std::abs(hopf(x, u, v));
        if (res < 1e-10 * scale) return x;
        break;
      }
    }
    std::ostringstream os;
    os << "Hopf relation did not converge at (" << u << ", " << v << ")";
    throw Error(ErrorKind::NewtonDiverged, os.str(), Witness{u, v});
  }

  std::array<Jet2, 3> metric(const Jet2& u, const Jet2& v) const {
    const double root = solve_lambda3(u.value(), v.value());
    const double dh = hopf(Jet<1>::variable(root, 0), Jet<1>(u.value()), Jet<1>(v.value())).d(0);
    Jet2 l3(root);
    for (int it = 0; it < 3; ++it) l3 = l3 - hopf(l3, u, v) / dh;
    const WaveState<Jet2> s = state(l3);
    const Jet2 G = s.F / (2.0 - (s.l1 + s.l2 + s.l3));
    const Jet2 E = -1.0 * G * s.l1 * s.l2 * s.l3;
    return {E, s.F, G};
  }

  const SimpleWaveSpec& spec() const { return spec_; }

 private:
  SimpleWaveSpec spec_;
  double slope_ = 0.0;
};

}  // namespace

SimpleWaveSpec simple_wave_from_metric(double E, double F, double G, const Profile& profile, double half_width) {
  const CharSpeeds sp = characteristic_speeds(E, F, G);
  if (!sp.all_real(1e-10)) throw Error(ErrorKind::ComplexSpeeds, "reference metric has complex speeds");
  const auto l = sp.real();
  const RiemannInvariants R = riemann_invariants(F, l);
  SimpleWaveSpec spec;
  spec.c1 = R.R1;
  spec.c2 = R.R2;
  spec.profile = profile;
  spec.lambda3_ref = l[2];
  spec.lambda2_ref = l[1];
  // On u = 0 the Hopf relation reads v = f(R3).
  const double vc = profile.kind() == Profile::Kind::constant ? 0.0 : profile(R.R3);
  spec.domain = Domain{-half_width, half_width, vc - half_width, vc + half_width};
  return spec;
}

SimpleWavePoint simple_wave_point(const SimpleWaveSpec& spec, double lambda3) {
  const SimpleWaveSolver solver(spec);
  const WaveState<double> s = solver.state(lambda3);
  return {s.l1, s.l2, s.l3, s.F};
}

MetricField make_simple_wave(const SimpleWaveSpec& spec) {
  auto solver = std::make_shared<const SimpleWaveSolver>(spec);
  MetricField field(jet_evaluator([solver](const Jet2& u, const Jet2& v) { return solver->metric(u, v); }), spec.domain,
                    FamilyTag::simple_wave, SignatureMode::riemannian, "simple_wave");
  field.set_parameter("c1", spec.c1);
  field.set_parameter("c2", spec.c2);
  check_positive_on_grid(field, 9);
  return field;
}

// ---------------------------------------------------------------------------
// Constant curvature baselines

MetricField make_constant_curvature(CurvatureKind kind) {
  switch (kind) {
    case CurvatureKind::flat:
      return MetricField(jet_evaluator([](const Jet2&, const Jet2&) { return std::array<Jet2, 3>{1.0, 0.0, 1.0}; }),
                         Domain{-1.0, 1.0, -1.0, 1.0}, FamilyTag::flat, SignatureMode::riemannian, "flat");
    case CurvatureKind::sphere: {
      // Geographic chart: colatitude u, longitude v.
      const double pi = std::numbers::pi;
      return MetricField(jet_evaluator([](const Jet2& u, const Jet2&) {
                           const Jet2 s = sin(u);
                           return std::array<Jet2, 3>{1.0, 0.0, s * s};
                         }),
                         Domain{0.5, pi - 0.5, -1.0, 2.0 * pi + 1.0}, FamilyTag::custom, SignatureMode::riemannian,
                         "sphere");
    }
    case CurvatureKind::hyperbolic:
      return MetricField(jet_evaluator([](const Jet2&, const Jet2& v) {
                           const Jet2 w = 1.0 / (v * v);
                           return std::array<Jet2, 3>{w, 0.0, w};
                         }),
                         Domain{-1.0, 1.0, 0.5, 2.0}, FamilyTag::custom, SignatureMode::riemannian, "hyperbolic");
  }
  throw Error(ErrorKind::InvalidArgument, "unknown curvature kind");
}

// ---------------------------------------------------------------------------
// Lie spiral immersion

namespace {

// Coefficients of exp(u)(h du^2 + 2 f du ds + g ds^2) in the sheared chart
// s = v - kappa u, evaluated at (u, s).
struct ShearedMetric {
  double h, f, g, dh;
};

ShearedMetric sheared(const MetricField& field, double kappa, double u, double s) {
  const MetricJet2 m = field.jet({u, s + kappa * u});
  return {m.E + 2.0 * kappa * m.F + kappa * kappa * m.G, m.F + kappa * m.G, m.G,
          m.Ev + 2.0 * kappa * m.Fv + kappa * kappa * m.Gv};
}

struct LieRhs {
  const MetricField* field;
  double kappa, alpha, branch;
  // State (U, V, W); returns derivatives and the discriminant.
  std::array<double, 4> eval(double r, const std::array<double, 3>& y) const {
    const double eU = std::exp(y[0]);
    const ShearedMetric m = sheared(*field, kappa, 0.0, y[1]);
    const double W = y[2];
    if (m.dh - m.f == 0.0 || W == 0.0)
      throw Error(ErrorKind::IntervalExhausted, "immersion equations degenerate");
    const double dV = alpha * alpha * r / (2.0 * eU * (m.dh - m.f));
    const double c1 = 2.0 * eU * m.h / W;
    const double c0 = (2.0 * eU * m.f * dV - r) / W;
    const double A = eU * m.h - c1 * c1;
    const double B = 2.0 * eU * m.f * dV - 2.0 * c1 * c0;
    const double C = eU * m.g * dV * dV - 1.0 - c0 * c0;
    const double D = B * B - 4.0 * A * C;
    if (D < 0.0) {
      std::ostringstream os;
      os << "discriminant " << D << " < 0 at r = " << r;
      throw Error(ErrorKind::NegativeDiscriminant, os.str());
    }
    if (A == 0.0) throw Error(ErrorKind::IntervalExhausted, "quadratic for U' degenerates");
    const double dU = (-B + branch * std::sqrt(D)) / (2.0 * A);
    return {dU, dV, c1 * dU + c0, D};
  }
};

}  // namespace

LieSpiralImmersion immerse_lie_spiral(const MetricField& field, double alpha, const LieSpiralSeed& seed) {
  if (seed.nodes < 2 || !(seed.r1 != seed.r0)) throw Error(ErrorKind::InvalidArgument, "empty r-interval");
  validate(seed.ode);
  const auto it = field.parameters().find("kappa");
  const double kappa = it == field.parameters().end() ? 0.0 : it->second;

  LieSpiralImmersion imm;
  imm.alpha = alpha;
  imm.kappa = kappa;

  const ShearedMetric m0 = sheared(field, kappa, 0.0, seed.V0);
  const double rad = 4.0 * std::exp(seed.U0) * m0.h - (1.0 + alpha * alpha) * seed.r0 * seed.r0;
  if (!(rad > 0.0)) throw Error(ErrorKind::NegativeDiscriminant, "no real W at the seed for this U0");
  std::array<double, 3> y{seed.U0, seed.V0, (seed.W_sign >= 0 ? 1.0 : -1.0) * std::sqrt(rad)};

  const LieRhs lie{&field, kappa, alpha, seed.branch};
  auto rhs = [&lie](double r, const std::array<double, 3>& x) {
    const auto d = lie.eval(r, x);
    return std::array<double, 3>{d[0], d[1], d[2]};
  };
  auto record = [&](double r) {
    const auto d = lie.eval(r, y);
    imm.r.push_back(r);
    imm.U.push_back(y[0]);
    imm.V.push_back(y[1]);
    imm.W.push_back(y[2]);
    imm.dU.push_back(d[0]);
    imm.dV.push_back(d[1]);
    imm.dW.push_back(d[2]);
    imm.discriminant.push_back(d[3]);
    // Residuals of the three immersion equations, relative to their terms.
    const double eU = std::exp(y[0]);
    const ShearedMetric m = sheared(field, kappa, 0.0, y[1]);
    const double r1 = 4.0 * eU * m.h - (1.0 + alpha * alpha) * r * r - y[2] * y[2];
    const double r2 = eU * (2.0 * m.h * d[0] + 2.0 * m.f * d[1]) - r - y[2] * d[2];
    const double r3 = eU * (m.h * d[0] * d[0] + 2.0 * m.f * d[0] * d[1] + m.g * d[1] * d[1]) - 1.0 - d[2] * d[2];
    const double s1 = 4.0 * eU * std::abs(m.h) + (1.0 + alpha * alpha) * r * r + y[2] * y[2];
    const double s2 = std::abs(r) + std::abs(y[2] * d[2]) + 1.0;
    const double s3 = 1.0 + d[2] * d[2];
    imm.max_equation_residual =
        std::max({imm.max_equation_residual, std::abs(r1) / s1, std::abs(r2) / s2, std::abs(r3) / s3});
  };

  try {
    record(seed.r0);
    for (int k = 1; k < seed.nodes; ++k) {
      const double a = seed.r0 + (seed.r1 - seed.r0) * (k - 1) / (seed.nodes - 1);
      const double b = seed.r0 + (seed.r1 - seed.r0) * k / (seed.nodes - 1);
      y = integrate_to<3>(rhs, y, a, b, seed.ode);
      record(b);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NegativeDiscriminant) throw;
    throw Error(ErrorKind::IntervalExhausted, std::string("immersion ends early: ") + e.what());
  }
  return imm;
}

double lie_pullback_mismatch(const LieSpiralImmersion& imm, const MetricField& field, int n_samples) {
  if (imm.r.size() < 2 || n_samples < 1) throw Error(ErrorKind::InvalidArgument, "empty immersion");
  const double a2 = imm.alpha * imm.alpha;
  double worst = 0.0;
  const std::size_t last = imm.r.size() - 1;
  for (int k = 0; k < n_samples; ++k) {
    // Node indices spread over the interval; theta cycles through a few values.
    const std::size_t i = static_cast<std::size_t>(std::llround(static_cast<double>(last) * k / std::max(1, n_samples - 1)));
    const double theta = -0.2 + 0.4 * ((k * 7) % 11) / 10.0;
    const double r = imm.r[i], U = imm.U[i], V = imm.V[i], W = imm.W[i];
    const double dU = imm.dU[i], dV = imm.dV[i], dW = imm.dW[i];
    const double e2 = std::exp(2.0 * theta);
    // Induced metric of (e^t r cos(a t), e^t r sin(a t), e^t W(r)).
    const double i_tt = e2 * ((1.0 + a2) * r * r + W * W);
    const double i_tr = e2 * (r + W * dW);
    const double i_rr = e2 * (1.0 + dW * dW);
    // Field metric pulled back through u = 2 theta + U(r), s = V(r).
    const ShearedMetric m = sheared(field, imm.kappa, 2.0 * theta + U, V);
    const double p_tt = 4.0 * m.h;
    const double p_tr = 2.0 * (m.h * dU + m.f * dV);
    const double p_rr = m.h * dU * dU + 2.0 * m.f * dU * dV + m.g * dV * dV;
    const double scale = std::max({std::abs(i_tt), std::abs(i_tr), std::abs(i_rr)});
    worst = std::max({worst, std::abs(i_tt - p_tt) / scale, std::abs(i_tr - p_tr) / scale,
                      std::abs(i_rr - p_rr) / scale});
  }
  return worst;
}

}  // namespace hexweb
