#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hexweb/chart_metric.hpp"
#include "hexweb/ode.hpp"

namespace hexweb {

struct PhasePoint {
  double u = 0, v = 0;
  double p = 0, q = 0;
};

// How the integrating factor (EG - F^2)^(-m) was chosen for a cubic form.
struct MuDecision {
  enum class Status { fixed, resolved, indistinguishable };
  Status status = Status::fixed;
  int exponent = 2;
  double residual_m1 = 0.0;  // max |{I, H}| on the probe set with m = 1
  double residual_m2 = 0.0;  // same with m = 2
  ChartPoint base{};         // where the factor is normalised to 1
};

const char* to_string(MuDecision::Status s);

// Coefficient fields of K3 p^3 + K2 p^2 q + K1 p q^2 + K0 q^3.
class CubicForm {
 public:
  using Coefficients = std::array<Jet2, 4>;  // K3, K2, K1, K0
  using Evaluator = std::function<Coefficients(const ChartPoint&)>;

  CubicForm() = default;
  explicit CubicForm(Evaluator eval, MuDecision mu = {});

  static CubicForm constant(double K3, double K2, double K1, double K0);

  Coefficients coefficients(const ChartPoint& x) const { return eval_(x); }
  const MuDecision& mu() const { return mu_; }

  // The same form with coefficient `index` (0 for K3 ... 3 for K0) scaled.
  CubicForm with_scaled_coefficient(int index, double factor) const;

 private:
  Evaluator eval_;
  MuDecision mu_;
};

// Value and canonical partials of a function on phase space.
struct PhaseGradient {
  double value = 0;
  double du = 0, dv = 0, dp = 0, dq = 0;
};

struct Hamiltonian {};
using PhaseFunction = std::variant<Hamiltonian, CubicForm>;

double hamiltonian(const MetricJet2& jet, double p, double q);
std::pair<double, double> momentum_to_velocity(const MetricJet2& jet, double p, double q);
std::pair<double, double> velocity_to_momentum(const MetricJet2& jet, double xi, double eta);

PhaseGradient hamiltonian_gradient(const MetricJet2& jet, double p, double q);
PhaseGradient cubic_gradient(const CubicForm& I, const PhasePoint& x);

double poisson_bracket(const MetricField& field, const PhaseFunction& A, const PhaseFunction& B, const PhasePoint& x);

// The integral built from a solution of the web system with a prescribed
// exponent, normalised so that the factor equals 1 at `base`.
CubicForm cubic_integral_with_exponent(const MetricField& field, int exponent, const ChartPoint& base);

struct CalibrationOptions {
  double residual_tol = 1e-6;  // relative residual of the web system
  double bracket_tol = 1e-8;   // a candidate passes when max |{I, H}| is below this
  int probe_points = 5;        // probe grid is probe_points x probe_points positions
  int probe_momenta = 4;       // momentum directions per position
};

// Throws NotASolution or CalibrationAmbiguous.
CubicForm cubic_integral_from_solution(const MetricField& field, const CalibrationOptions& opts = {});

// Largest |{I, H}| over a deterministic probe set.
double max_bracket_residual(const MetricField& field, const CubicForm& I, int probe_points = 5, int probe_momenta = 4);

// Residuals of the resolved first-order relations that hold for a factored
// integral (Gp - Fq)(Eq - Fp)[L(Gp - Fq) + K(Eq - Fp)], evaluated from the
// metric jet and the jets of L and K.  Returns the largest absolute residual.
double factored_integral_relations_residual(const MetricJet2& jet, const Jet2& L, const Jet2& K);

struct Trajectory {
  std::vector<double> t;
  std::vector<PhasePoint> x;
  Termination status = Termination::completed;
};

Trajectory integrate_geodesic(const MetricField& field, const PhasePoint& x0, double t_span,
                              const IntegratorConfig& cfg);

struct TrajectoryDrift {
  PhasePoint start{};
  double rel_drift = 0.0;
  double energy_drift = 0.0;
  Termination status = Termination::completed;
  std::string error;
};

struct ConservationReport {
  double max_rel_drift = 0.0;
  int failures = 0;
  std::vector<TrajectoryDrift> per_trajectory;
};

// Random but reproducible initial data: positions in the central half of the
// domain, chart speed a fifth of the shorter domain side.
std::vector<PhasePoint> sample_phase_points(const MetricField& field, int n, std::uint64_t seed);

ConservationReport conservation_report(const MetricField& field, const CubicForm& I, int n_trajectories,
                                       const IntegratorConfig& cfg, std::uint64_t seed = 1, double t_span = 1.0);

}  // namespace hexweb
