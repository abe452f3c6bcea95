#pragma once

// Thin adaptive-integration layer over Boost.Odeint's Dormand-Prince 5(4)
// stepper, plus a dense representation of autonomous-in-form ODE families.

#include <algorithm>
#include <array>
#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "hexweb/errors.hpp"
#include "hexweb/jet.hpp"

namespace hexweb {

struct IntegratorConfig {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double max_step = 0.05;
};

void validate(const IntegratorConfig& cfg);

enum class Termination { completed, domain_exit, step_failure };

const char* to_string(Termination t);

template <std::size_t N>
struct OdePath {
  std::vector<double> t;
  std::vector<std::array<double, N>> x;
  Termination status = Termination::completed;
};

// Integrate x' = rhs(t, x) from t0 to t1 (either direction).  inside(x) is
// checked after every accepted step; the first state where it fails is not
// recorded and the path ends with domain_exit.
template <std::size_t N, class Rhs, class Inside>
OdePath<N> integrate_path(Rhs&& rhs, std::array<double, N> x, double t0, double t1, const IntegratorConfig& cfg,
                          Inside&& inside, bool record_all = true) {
  namespace odeint = boost::numeric::odeint;
  using state = std::array<double, N>;
  auto stepper = odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, odeint::runge_kutta_dopri5<state>());
  auto sys = [&rhs](const state& y, state& dy, double t) { dy = rhs(t, y); };

  OdePath<N> path;
  path.t.push_back(t0);
  path.x.push_back(x);
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  double dt = dir * std::min(cfg.max_step, std::abs(t1 - t0));
  if (dt == 0.0) return path;
  const double t_eps = 1e-14 * (1.0 + std::abs(t1));
  int failures = 0;
  long accepted = 0;
  while (dir * (t1 - t) > t_eps) {
    // A right-hand side with a jump makes the controller crawl; cap the work.
    if (accepted > 2000000) {
      path.status = Termination::step_failure;
      return path;
    }
    if (dir * (t + dt - t1) > 0.0) dt = t1 - t;
    state trial = x;
    double t_trial = t;
    double dt_trial = dt;
    const auto res = stepper.try_step(sys, trial, t_trial, dt_trial);
    if (res == odeint::fail) {
      dt = dt_trial;
      if (std::abs(dt) < 1e-14 * (1.0 + std::abs(t)) || ++failures > 10000) {
        path.status = Termination::step_failure;
        return path;
      }
      continue;
    }
    failures = 0;
    ++accepted;
    bool finite = true;
    for (double v : trial) finite = finite && std::isfinite(v);
    if (!finite) {
      path.status = Termination::step_failure;
      return path;
    }
    if (!inside(trial)) {
      path.status = Termination::domain_exit;
      return path;
    }
    x = trial;
    t = t_trial;
    dt = dir * std::min(std::abs(dt_trial), cfg.max_step);
    if (record_all || dir * (t1 - t) <= t_eps) {
      path.t.push_back(t);
      path.x.push_back(x);
    }
  }
  return path;
}

// Integrate without a domain predicate and return the final state, throwing
// on step failure.
template <std::size_t N, class Rhs>
std::array<double, N> integrate_to(Rhs&& rhs, const std::array<double, N>& x0, double t0, double t1,
                                   const IntegratorConfig& cfg) {
  auto path = integrate_path<N>(rhs, x0, t0, t1, cfg, [](const std::array<double, N>&) { return true; }, false);
  if (path.status != Termination::completed) throw Error(ErrorKind::StepFailure, "step size underflow");
  return path.x.back();
}

// Dense solution of y' = f(s, y) on [s_lo, s_hi] sampled on uniform nodes and
// reconstructed by quintic Hermite interpolation.  First and second
// derivatives at any s are taken from the right-hand side itself, not from
// the interpolant.
template <std::size_t N>
class DenseOde {
 public:
  using State = std::array<double, N>;
  using J1 = Jet<1>;
  using JetState = std::array<J1, N>;
  using JetRhs = std::function<JetState(const J1&, const JetState&)>;

  struct Sample {
    State y, dy, ddy;
  };

  DenseOde() = default;

  // rhs must be callable with (double, State) and (J1, JetState).  guard(s, y)
  // may throw to abort integration (e.g. when a singular locus is reached).
  template <class Rhs, class Guard>
  DenseOde(Rhs rhs, double s0, const State& y0, double s_lo, double s_hi, double spacing,
           const IntegratorConfig& cfg, Guard guard)
      : jet_rhs_([rhs](const J1& s, const JetState& y) { return rhs(s, y); }) {
    if (!(s_lo <= s0 && s0 <= s_hi)) throw Error(ErrorKind::InvalidArgument, "seed outside the dense interval");
    const int n_lo = static_cast<int>(std::ceil((s0 - s_lo) / spacing - 1e-9));
    const int n_hi = static_cast<int>(std::ceil((s_hi - s0) / spacing - 1e-9));
    const double h_lo = n_lo > 0 ? (s0 - s_lo) / n_lo : spacing;
    const double h_hi = n_hi > 0 ? (s_hi - s0) / n_hi : spacing;
    auto f = [&rhs](double s, const State& y) { return rhs(s, y); };

    std::vector<double> s_back{s0};
    std::vector<State> y_back{y0};
    State y = y0;
    guard(s0, y0);
    for (int k = 1; k <= n_lo; ++k) {
      const double a = s0 - (k - 1) * h_lo, b = s0 - k * h_lo;
      y = integrate_to<N>(f, y, a, b, cfg);
      guard(b, y);
      s_back.push_back(b);
      y_back.push_back(y);
    }
    for (int k = static_cast<int>(s_back.size()) - 1; k >= 0; --k) {
      s_.push_back(s_back[k]);
      y_.push_back(y_back[k]);
    }
    y = y0;
    for (int k = 1; k <= n_hi; ++k) {
      const double a = s0 + (k - 1) * h_hi, b = s0 + k * h_hi;
      y = integrate_to<N>(f, y, a, b, cfg);
      guard(b, y);
      s_.push_back(b);
      y_.push_back(y);
    }
    for (std::size_t k = 0; k < s_.size(); ++k) {
      const Sample d = derivatives(s_[k], y_[k]);
      dy_.push_back(d.dy);
      ddy_.push_back(d.ddy);
    }
  }

  double lo() const { return s_.front(); }
  double hi() const { return s_.back(); }
  const std::vector<double>& nodes() const { return s_; }
  const std::vector<State>& values() const { return y_; }

  Sample operator()(double s) const {
    const double tol = 1e-12 * (1.0 + std::abs(s));
    if (s_.empty() || s < s_.front() - tol || s > s_.back() + tol) {
      std::ostringstream os;
      os << "s = " << s << " outside the integrated interval";
      throw Error(ErrorKind::DomainExit, os.str());
    }
    std::size_t k = static_cast<std::size_t>(std::upper_bound(s_.begin(), s_.end(), s) - s_.begin());
    k = std::clamp<std::size_t>(k, 1, s_.size() - 1) - 1;
    const double h = s_[k + 1] - s_[k];
    const double t = std::clamp((s - s_[k]) / h, 0.0, 1.0);
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    const double h10 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    const double h01 = 10 * t3 - 15 * t4 + 6 * t5;
    const double h11 = -4 * t3 + 7 * t4 - 3 * t5;
    const double h21 = 0.5 * t3 - t4 + 0.5 * t5;
    State y{};
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = h00 * y_[k][i] + h * h10 * dy_[k][i] + h * h * h20 * ddy_[k][i] + h01 * y_[k + 1][i] +
             h * h11 * dy_[k + 1][i] + h * h * h21 * ddy_[k + 1][i];
    }
    return derivatives(s, y);
  }

 private:
  Sample derivatives(double s, const State& y) const {
    JetState yj{};
    for (std::size_t i = 0; i < N; ++i) yj[i] = J1(y[i]);
    JetState first = jet_rhs_(J1(s), yj);
    for (std::size_t i = 0; i < N; ++i) {
      yj[i] = J1::variable(y[i], 0);
      yj[i].set_d(0, first[i].value());
    }
    const JetState second = jet_rhs_(J1::variable(s, 0), yj);
    Sample out;
    out.y = y;
    for (std::size_t i = 0; i < N; ++i) {
      out.dy[i] = second[i].value();
      out.ddy[i] = second[i].d(0);
    }
    return out;
  }

  JetRhs jet_rhs_;
  std::vector<double> s_;
  std::vector<State> y_, dy_, ddy_;
};

}  // namespace hexweb
