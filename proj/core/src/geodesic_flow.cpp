#include "hexweb/geodesic_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hexweb/errors.hpp"
#include "hexweb/hydro_system.hpp"
#include "hexweb/parallel.hpp"

namespace hexweb {

const char* to_string(MuDecision::Status s) {
  switch (s) {
    case MuDecision::Status::fixed: return "fixed";
    case MuDecision::Status::resolved: return "resolved";
    case MuDecision::Status::indistinguishable: return "indistinguishable";
  }
  return "fixed";
}

CubicForm::CubicForm(Evaluator eval, MuDecision mu) : eval_(std::move(eval)), mu_(mu) {}

CubicForm CubicForm::constant(double K3, double K2, double K1, double K0) {
  return CubicForm([=](const ChartPoint&) { return Coefficients{Jet2(K3), Jet2(K2), Jet2(K1), Jet2(K0)}; });
}

CubicForm CubicForm::with_scaled_coefficient(int index, double factor) const {
  if (index < 0 || index > 3) throw Error(ErrorKind::InvalidArgument, "coefficient index must be in 0..3");
  Evaluator inner = eval_;
  CubicForm out([inner, index, factor](const ChartPoint& x) {
    Coefficients k = inner(x);
    k[index] *= factor;
    return k;
  }, mu_);
  return out;
}

namespace {

double checked_det(const MetricJet2& m) {
  const double W = determinant(m);
  if (!(std::abs(W) > degeneracy_tol(m))) throw Error(ErrorKind::DegenerateMetric, "EG - F^2 vanishes");
  return W;
}

}  // namespace

double hamiltonian(const MetricJet2& m, double p, double q) {
  const double W = checked_det(m);
  return (m.G * p * p - 2.0 * m.F * p * q + m.E * q * q) / (2.0 * W);
}

std::pair<double, double> momentum_to_velocity(const MetricJet2& m, double p, double q) {
  const double W = checked_det(m);
  return {(m.G * p - m.F * q) / W, (m.E * q - m.F * p) / W};
}

std::pair<double, double> velocity_to_momentum(const MetricJet2& m, double xi, double eta) {
  return {m.E * xi + m.F * eta, m.F * xi + m.G * eta};
}

PhaseGradient hamiltonian_gradient(const MetricJet2& m, double p, double q) {
  const double W = checked_det(m);
  const MetricJets j = as_jets(m);
  const Jet2 H = (j.G * (p * p) - j.F * (2.0 * p * q) + j.E * (q * q)) / (2.0 * (j.E * j.G - j.F * j.F));
  PhaseGradient g;
  g.value = H.value();
  g.du = H.d(0);
  g.dv = H.d(1);
  g.dp = (m.G * p - m.F * q) / W;
  g.dq = (m.E * q - m.F * p) / W;
  return g;
}

PhaseGradient cubic_gradient(const CubicForm& I, const PhasePoint& x) {
  const auto K = I.coefficients({x.u, x.v});
  const double p = x.p, q = x.q;
  const double mono[4] = {p * p * p, p * p * q, p * q * q, q * q * q};
  const double mono_p[4] = {3 * p * p, 2 * p * q, q * q, 0.0};
  const double mono_q[4] = {0.0, p * p, 2 * p * q, 3 * q * q};
  PhaseGradient g;
  for (int i = 0; i < 4; ++i) {
    g.value += K[i].value() * mono[i];
    g.du += K[i].d(0) * mono[i];
    g.dv += K[i].d(1) * mono[i];
    g.dp += K[i].value() * mono_p[i];
    g.dq += K[i].value() * mono_q[i];
  }
  return g;
}

namespace {

PhaseGradient gradient_of(const MetricField& field, const PhaseFunction& f, const PhasePoint& x) {
  if (std::holds_alternative<Hamiltonian>(f)) return hamiltonian_gradient(field.jet({x.u, x.v}), x.p, x.q);
  return cubic_gradient(std::get<CubicForm>(f), x);
}

double bracket(const PhaseGradient& a, const PhaseGradient& b) {
  return a.dp * b.du - a.du * b.dp + a.dq * b.dv - a.dv * b.dq;
}

CubicForm::Coefficients cubic_coefficients(const MetricJets& j, const Jet2& mu) {
  const Jet2 a0 = j.G, a1 = -j.F;
  const Jet2 b0 = -j.F, b1 = j.E;
  const Jet2 c0 = j.G - j.F, c1 = j.E - j.F;
  return {mu * (a0 * b0 * c0), mu * (a0 * b0 * c1 + a0 * b1 * c0 + a1 * b0 * c0),
          mu * (a0 * b1 * c1 + a1 * b0 * c1 + a1 * b1 * c0), mu * (a1 * b1 * c1)};
}

std::vector<PhasePoint> probe_set(const Domain& d, int n_pos, int n_mom) {
  std::vector<PhasePoint> out;
  for (const ChartPoint& c : d.interior_grid(n_pos, n_pos)) {
    for (int k = 0; k < n_mom; ++k) {
      const double th = std::numbers::pi * (k + 0.5) / n_mom;
      out.push_back({c.u, c.v, std::cos(th), std::sin(th)});
    }
  }
  return out;
}

}  // namespace

double poisson_bracket(const MetricField& field, const PhaseFunction& A, const PhaseFunction& B, const PhasePoint& x) {
  return bracket(gradient_of(field, A, x), gradient_of(field, B, x));
}

CubicForm cubic_integral_with_exponent(const MetricField& field, int exponent, const ChartPoint& base) {
  if (exponent < 1) throw Error(ErrorKind::InvalidArgument, "integrating-factor exponent must be positive");
  const double W0 = determinant(field.jet(base));
  MuDecision mu;
  mu.exponent = exponent;
  mu.base = base;
  const MetricField f = field;
  return CubicForm([f, exponent, W0](const ChartPoint& x) {
    const MetricJets j = as_jets(f.jet(x));
    const Jet2 W = j.E * j.G - j.F * j.F;
    const Jet2 mu_jet = pow(W / W0, -static_cast<double>(exponent));
    return cubic_coefficients(j, mu_jet);
  }, mu);
}

double max_bracket_residual(const MetricField& field, const CubicForm& I, int probe_points, int probe_momenta) {
  double worst = 0.0;
  for (const PhasePoint& x : probe_set(field.domain(), probe_points, probe_momenta)) {
    worst = std::max(worst, std::abs(poisson_bracket(field, I, Hamiltonian{}, x)));
  }
  return worst;
}

CubicForm cubic_integral_from_solution(const MetricField& field, const CalibrationOptions& opts) {
  const Domain& d = field.domain();
  const ChartPoint base = d.center();
  const double W0 = determinant(field.jet(base));
  double w_spread = 0.0;
  for (const ChartPoint& c : d.interior_grid(opts.probe_points, opts.probe_points)) {
    const MetricJet2 m = field.jet(c);
    const HydroResidual r = hydro_residual(m);
    if (r.max_abs() > opts.residual_tol * hydro_residual_scale(m)) {
      std::ostringstream os;
      os << "metric does not solve the web system (residual " << r.max_abs() << ")";
      throw Error(ErrorKind::NotASolution, os.str(), Witness{c.u, c.v});
    }
    w_spread = std::max(w_spread, std::abs(determinant(m) - W0));
  }

  MuDecision mu;
  mu.base = base;
  CubicForm candidate[2] = {cubic_integral_with_exponent(field, 1, base), cubic_integral_with_exponent(field, 2, base)};
  mu.residual_m1 = max_bracket_residual(field, candidate[0], opts.probe_points, opts.probe_momenta);
  mu.residual_m2 = max_bracket_residual(field, candidate[1], opts.probe_points, opts.probe_momenta);

  if (w_spread <= 1e-12 * std::abs(W0)) {
    // Constant EG - F^2: every exponent yields the same normalised form.
    mu.status = MuDecision::Status::indistinguishable;
    mu.exponent = 2;
    if (mu.residual_m2 > opts.bracket_tol) {
      throw Error(ErrorKind::CalibrationAmbiguous, "no integrating-factor exponent passes the bracket test");
    }
    const CubicForm chosen = candidate[1];
    return CubicForm([chosen](const ChartPoint& x) { return chosen.coefficients(x); }, mu);
  }
  const bool pass1 = mu.residual_m1 < opts.bracket_tol;
  const bool pass2 = mu.residual_m2 < opts.bracket_tol;
  if (pass1 == pass2) {
    std::ostringstream os;
    os << "integrating-factor exponent undecided (m=1: " << mu.residual_m1 << ", m=2: " << mu.residual_m2 << ")";
    throw Error(ErrorKind::CalibrationAmbiguous, os.str());
  }
  mu.status = MuDecision::Status::resolved;
  mu.exponent = pass1 ? 1 : 2;
  const CubicForm chosen = candidate[pass1 ? 0 : 1];
  return CubicForm([chosen](const ChartPoint& x) { return chosen.coefficients(x); }, mu);
}

double factored_integral_relations_residual(const MetricJet2& m, const Jet2& L, const Jet2& K) {
  const double E = m.E, F = m.F, G = m.G, W = E * G - F * F;
  const double Ev = m.Ev, Fv = m.Fv, Gv = m.Gv;
  const double l = L.value(), k = K.value(), Lv = L.d(1), Ku = K.d(0);
  const double Eu = E / (5 * k) *
                    (2 * (k * F - l * G) / W * Ev + 4 * (l * F - k * E) / W * Fv +
                     (2 * k * E * F + 3 * l * F * F - 5 * l * E * G) / (G * W) * Gv - 2 * Lv - 2 * Ku);
  const double Fu = F / (5 * k) *
                    ((5 * k * E * G - 2 * l * F * G - 3 * k * F * F) / (2 * F * W) * Ev + 2 * (l * F - k * E) / W * Fv +
                     (2 * k * E * F - 5 * l * E * G + 3 * l * F * F) / (2 * G * W) * Gv - Lv - Ku);
  const double Gu = 2 * Fv - F / G * Gv;
  const double Lu = 2 * l / (5 * k) *
                    ((2 * l * G + 3 * k * F) / W * Ev - 2 * (2 * l * F + 3 * k * E) / W * Fv +
                     (3 * k * E * F + 5 * l * E * G - 3 * l * F * F) / (G * W) * Gv + 2 * Lv + 2 * Ku);
  const double Kv = 2 * k / W * (2 * F * Fv - G * Ev - E * Gv);
  return std::max({std::abs(Eu - m.Eu), std::abs(Fu - m.Fu), std::abs(Gu - m.Gu), std::abs(Lu - L.d(0)),
                   std::abs(Kv - K.d(1))});
}

Trajectory integrate_geodesic(const MetricField& field, const PhasePoint& x0, double t_span,
                              const IntegratorConfig& cfg) {
  validate(cfg);
  if (!field.domain().contains({x0.u, x0.v})) {
    throw Error(ErrorKind::DomainExit, "initial point outside the chart", Witness{x0.u, x0.v});
  }
  using S = std::array<double, 4>;
  auto rhs = [&field](double, const S& s) {
    const PhaseGradient g = hamiltonian_gradient(field.jet({s[0], s[1]}), s[2], s[3]);
    return S{g.dp, g.dq, -g.du, -g.dv};
  };
  const Domain& d = field.domain();
  auto inside = [&d](const S& s) { return d.contains({s[0], s[1]}); };
  const auto path = integrate_path<4>(rhs, S{x0.u, x0.v, x0.p, x0.q}, 0.0, t_span, cfg, inside);
  Trajectory tr;
  tr.t = path.t;
  tr.status = path.status;
  tr.x.reserve(path.x.size());
  for (const S& s : path.x) tr.x.push_back({s[0], s[1], s[2], s[3]});
  return tr;
}

namespace {

double unit_from(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<PhasePoint> sample_phase_points(const MetricField& field, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Domain& d = field.domain();
  const double wu = d.u1 - d.u0, wv = d.v1 - d.v0;
  const ChartPoint c = d.center();
  const double speed = 0.2 * std::min(wu, wv);
  std::vector<PhasePoint> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double u = c.u + 0.25 * wu * (2.0 * unit_from(rng()) - 1.0);
    const double v = c.v + 0.25 * wv * (2.0 * unit_from(rng()) - 1.0);
    const double th = 2.0 * std::numbers::pi * unit_from(rng());
    const auto [p, q] = velocity_to_momentum(field.jet({u, v}), speed * std::cos(th), speed * std::sin(th));
    out.push_back({u, v, p, q});
  }
  return out;
}

ConservationReport conservation_report(const MetricField& field, const CubicForm& I, int n_trajectories,
                                       const IntegratorConfig& cfg, std::uint64_t seed, double t_span) {
  const std::vector<PhasePoint> starts = sample_phase_points(field, n_trajectories, seed);
  ConservationReport rep;
  rep.per_trajectory.resize(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    TrajectoryDrift& out = rep.per_trajectory[i];
    const PhasePoint& x0 = starts[i];
    out.start = x0;
    try {
      const Trajectory tr = integrate_geodesic(field, x0, t_span, cfg);
      out.status = tr.status;
      const auto K = I.coefficients({x0.u, x0.v});
      double kmax = 0.0;
      for (const Jet2& k : K) kmax = std::max(kmax, std::abs(k.value()));
      const double pn = std::hypot(x0.p, x0.q);
      const double I0 = cubic_gradient(I, x0).value;
      const double H0 = hamiltonian(field.jet({x0.u, x0.v}), x0.p, x0.q);
      const double scale = std::max(std::abs(I0), kmax * pn * pn * pn);
      for (const PhasePoint& x : tr.x) {
        out.rel_drift = std::max(out.rel_drift, std::abs(cubic_gradient(I, x).value - I0) / scale);
        out.energy_drift =
            std::max(out.energy_drift, std::abs(hamiltonian(field.jet({x.u, x.v}), x.p, x.q) - H0) / std::abs(H0));
      }
      if (tr.status != Termination::completed) out.error = to_string(tr.status);
    } catch (const Error& e) {
      out.status = Termination::step_failure;
      out.error = e.what();
    }
  });
  for (const TrajectoryDrift& t : rep.per_trajectory) {
    rep.max_rel_drift = std::max(rep.max_rel_drift, t.rel_drift);
    if (t.status != Termination::completed) ++rep.failures;
  }
  return rep;
}

}  // namespace hexweb
