#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "hexweb/chart_metric.hpp"
#include "hexweb/geodesic_flow.hpp"
#include "hexweb/ode.hpp"

namespace hexweb {

// A direction field given by an annihilating covector alpha du + beta dv; the
// leaves have tangent (beta, -alpha) and slope dv/du = -alpha / beta.
struct Direction {
  Jet2 alpha, beta;
};

struct Slope {
  double m = 0.0;
  bool vertical = false;
};

enum class WebProvenance { from_integral, coordinate_web, dual_dim3, dual_dim2, custom };

const char* to_string(WebProvenance p);

class Web3Field {
 public:
  using Evaluator = std::function<std::array<Direction, 3>(const ChartPoint&)>;

  Web3Field(Evaluator eval, Domain domain, WebProvenance provenance);

  std::array<Direction, 3> directions(const ChartPoint& p) const { return eval_(p); }
  std::array<Slope, 3> slopes(const ChartPoint& p) const;
  const Domain& domain() const { return domain_; }
  WebProvenance provenance() const { return provenance_; }

  // Webs with foliations reordered: result i is this web's order[i].
  Web3Field permuted(const std::array<int, 3>& order) const;
  // Multiply the slope of foliation `index` by exp(amplitude (u - uc)(v - vc))
  // about the domain centre.  This shifts the Blaschke curvature of a
  // coordinate web by exactly `amplitude`.
  Web3Field with_bilinear_slope_perturbation(int index, double amplitude) const;
  // The foliation whose leaves are furthest from the coordinate directions at
  // the domain centre; scaling the slope of a horizontal or vertical
  // foliation would leave it unchanged.
  int most_oblique_foliation() const;
  // Multiply the slope of foliation `index` by an arbitrary positive factor.
  Web3Field with_slope_factor(int index, std::function<Jet2(const Jet2& u, const Jet2& v)> factor) const;

 private:
  Evaluator eval_;
  Domain domain_;
  WebProvenance provenance_;
};

// du = 0, dv = 0, du + dv = 0.
Web3Field coordinate_web(const Domain& domain);

// Web of slope fields in a chart; slopes are jets of dv/du.
Web3Field web_from_slopes(std::function<std::array<Jet2, 3>(const Jet2& u, const Jet2& v)> slopes, const Domain& domain,
                          WebProvenance provenance);

struct BinaryCubicRoots {
  std::array<double, 3> angle;  // momentum directions (cos a, sin a), a in [0, pi)
  double discriminant = 0.0;
};

// Classifies the binary cubic by its discriminant and returns the three real
// projective roots; throws ComplexRoots or RepeatedRoots.
BinaryCubicRoots binary_cubic_roots(const std::array<double, 4>& K, double root_tol = 1e-10);

Web3Field web_from_cubic_integral(const MetricField& field, const CubicForm& I);

struct ChernData {
  double Gamma_u = 0, Gamma_v = 0;
  double K_B = 0;
};

inline constexpr double kTransversalityTol = 1e-6;

ChernData blaschke_curvature(const Web3Field& web, const ChartPoint& p);

// Max |K_B| over an interior grid.
double max_blaschke_curvature(const Web3Field& web, int n_u, int n_v, ChartPoint* witness = nullptr);

struct Polyline {
  int foliation = 0;
  std::vector<ChartPoint> points;
};

// Leaf of foliation `index` through p, followed for chart arclength `length`
// (negative to go backwards).  Orientation follows the tangent at p.
OdePath<2> follow_leaf(const Web3Field& web, int index, const ChartPoint& p, double length, const IntegratorConfig& cfg);

// Sampled leaves of all foliations through seeds across the domain.
std::vector<Polyline> sample_leaves(const Web3Field& web, int leaves_per_foliation, const IntegratorConfig& cfg);

// Thomsen hexagon through p0 with side scale eps; returns the metric length of
// the gap between the start and end of the circuit.
double hexagon_closure_defect(const MetricField& field, const Web3Field& web, const ChartPoint& p0, double eps,
                              const IntegratorConfig& cfg);

// Residual of the geodesic slope equation along the leaf of `index` at p.
double geodesic_leaf_residual(const MetricField& field, const Web3Field& web, const ChartPoint& p, int index);

}  // namespace hexweb
