#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hexweb/chart_metric.hpp"
#include "hexweb/ode.hpp"

namespace hexweb {

// Built-in scalar profiles used by config-driven families.
//   constant: a
//   poly:     c0 + c1 s + c2 s^2 + ...
//   trig:     a + b sin(w s + phi)
//   exp:      a + b exp(c s)
class Profile {
 public:
  enum class Kind { constant, poly, trig, exp };

  Profile() = default;
  Profile(Kind kind, std::vector<double> params);

  static Profile constant(double a) { return Profile(Kind::constant, {a}); }
  static Profile trig(double a, double b, double w, double phi) { return Profile(Kind::trig, {a, b, w, phi}); }
  static Profile linear(double c0, double c1) { return Profile(Kind::poly, {c0, c1}); }

  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }

  template <class T>
  T operator()(const T& s) const {
    using std::exp;
    using std::sin;
    switch (kind_) {
      case Kind::constant: return T(params_[0]);
      case Kind::poly: {
        T acc(0.0);
        for (std::size_t k = params_.size(); k-- > 0;) acc = acc * s + params_[k];
        return acc;
      }
      case Kind::trig: return params_[0] + params_[1] * sin(params_[2] * s + params_[3]);
      case Kind::exp: return params_[0] + params_[1] * exp(params_[2] * s);
    }
    return T(0.0);
  }

 private:
  Kind kind_ = Kind::constant;
  std::vector<double> params_{0.0};
};

const char* to_string(Profile::Kind k);

struct TranslationFamilySpec {
  Profile h = Profile::trig(2.0, 1.0, 1.0, 0.0);
  double f0 = 5.0;
  Domain domain{-0.3, 0.3, 1.2707963267948966, 1.8707963267948966};
  SignatureMode mode = SignatureMode::riemannian;
};

// E = G = h(s)^2, F = f0 h(s) - h(s)^2 with s = v - u.
MetricField make_translation_family(const TranslationFamilySpec& spec);

// The printed curvature of the translation family at s.
double translation_family_curvature(const Profile& h, double f0, double s);

struct KappaClass {
  bool admits_nonconstant = false;
};
KappaClass classify_translation_kappa(double kappa);

struct OdeFamilySpec {
  enum class Family { spiral, dilation };
  enum class Constraint { none, a, b, c };

  Family family = Family::spiral;
  double kappa = 1.0;
  double e0 = 2.0, j0 = 1.0, f0 = 0.5;
  double s0 = 0.0;
  Domain domain{-0.3, 0.3, -0.3, 0.3};
  // Constant-curvature branches of the dilation family with kappa = -2; when
  // set, e0 is derived from the constraint.
  Constraint constraint = Constraint::none;
  // Dilation family branch where the system determinant vanishes
  // identically; kappa is forced to 0 and e follows algebraically.
  bool degenerate_branch = false;
  // Optional explicit s-interval (widened to cover the domain and s0).
  std::optional<std::pair<double, double>> s_interval;
  double node_spacing = 0.004;
  IntegratorConfig ode{1e-13, 1e-15, 0.01};
  SignatureMode mode = SignatureMode::riemannian;
};

const char* to_string(OdeFamilySpec::Constraint c);

// E = exp(u) e(s), F = exp(u) f(s), G = exp(u) j(s), s = v - kappa u.
MetricField make_spiral_family(const OdeFamilySpec& spec);
// E = u^kappa e(s), ..., s = v / u.
MetricField make_dilation_family(const OdeFamilySpec& spec);

// delta of the spiral system (with +e as the constant term).
double spiral_delta(double kappa, double e, double j, double f);
// Printed curvature of the spiral family at (u, s).
double spiral_family_curvature(double kappa, double u, double e, double j, double f);
// Printed constant curvature of the kappa = -2 branches, evaluated at s.
double dilation_branch_curvature(OdeFamilySpec::Constraint c, double s, double e, double j, double f);
double dilation_constraint_residual(OdeFamilySpec::Constraint c, double s, double e, double j, double f);

struct SimpleWaveSpec {
  double c1 = 0.0, c2 = 0.0;  // frozen first and second Riemann invariants
  Profile profile = Profile::linear(0.0, 1.0);
  double lambda3_ref = 0.0;       // seed for the Hopf solve
  double lambda2_ref = 0.0;       // seed for the eliminant at lambda3_ref
  double bracket_halfwidth = 0.05;
  Domain domain{-0.05, 0.05, -0.05, 0.05};
};

// Frozen invariants and seeds taken from a constant metric; the domain is
// centred where the Hopf relation reproduces that metric (u = 0).
SimpleWaveSpec simple_wave_from_metric(double E, double F, double G, const Profile& profile, double half_width);

MetricField make_simple_wave(const SimpleWaveSpec& spec);

// Speeds lambda2 and F as functions of lambda3 along the wave, exposed for
// diagnostics.
struct SimpleWavePoint {
  double lambda1, lambda2, lambda3, F;
};
SimpleWavePoint simple_wave_point(const SimpleWaveSpec& spec, double lambda3);

enum class CurvatureKind { flat, sphere, hyperbolic };
MetricField make_constant_curvature(CurvatureKind kind);

// Defaults suit the shear-1 spiral family with a twist of about 2.  A real
// solution needs alpha^2 (hg - f^2) >= (h' - f)^2 along the curve, so small
// twists fail whatever U0 is.
struct LieSpiralSeed {
  double U0 = 0.0, V0 = 0.2, r0 = 1.0, r1 = 1.3;
  double W_sign = 1.0;       // sign of W at r0
  double branch = 1.0;       // root of the quadratic for U'
  int nodes = 61;
  IntegratorConfig ode{1e-12, 1e-14, 0.01};
};

struct LieSpiralImmersion {
  double alpha = 0.0;
  double kappa = 0.0;
  std::vector<double> r, U, V, W, dU, dV, dW, discriminant;
  double max_equation_residual = 0.0;
};

// Throws NegativeDiscriminant or IntervalExhausted.  The field must be a
// spiral family (exp(u)-invariant); its shear kappa is read from the field
// parameters.
LieSpiralImmersion immerse_lie_spiral(const MetricField& field, double alpha, const LieSpiralSeed& seed = {});

// Max relative mismatch between the immersion's induced metric and the field
// at n deterministic (theta, r) samples.
double lie_pullback_mismatch(const LieSpiralImmersion& imm, const MetricField& field, int n_samples = 50);

}  // namespace hexweb
