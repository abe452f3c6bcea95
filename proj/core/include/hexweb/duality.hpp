#pragma once

// Webs of geodesics on surfaces with a large projective symmetry algebra, in
// the (z, y) chart where geodesics are the conics A y^2 + 2 B y + C + D z^2 = 0.

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "hexweb/chart_metric.hpp"
#include "hexweb/web3.hpp"

namespace hexweb {

// Homogeneous point [A : B : C : D] of the dual space.
struct DualPoint {
  double A = 0, B = 0, C = 0, D = 0;
};

DualPoint normalized(const DualPoint& p);
// AC - B^2 + eps D^2 after normalisation to max-abs 1.
double quadric_residual(const DualPoint& p, int eps);

// Conic k^2 (y - l)^2 - k z^2 = eps; `special` marks the limit k -> infinity,
// the double line y = l.
struct ConicGeodesic {
  double k = 1.0, l = 0.0;
  bool special = false;
};

DualPoint geodesic_to_dual(const ConicGeodesic& g, int eps);

// Dual point of the geodesic through (z, y) with slope dy/dz = P (D = 1).
DualPoint slope_to_dual(double z, double y, double P, int eps);
// Slope at (z, y) of the geodesic with dual point p; throws SlopeAmbiguity when
// the geodesic is vertical there.
double dual_to_slope(double z, double y, const DualPoint& p);

// The plane a A + b B + c C + delta D = 0.
struct PlaneSection {
  double a = 0, b = 0, c = 0, delta = 0;
};

enum class DualRegime { dim3, dim2 };

// Three slope fields dy/dz over a (z, y) chart (u = z, v = y).
struct SlopeTriple {
  using Evaluator = std::function<std::array<Jet2, 3>(const Jet2& z, const Jet2& y)>;
  Evaluator slopes;
  Domain domain;
  DualRegime regime = DualRegime::dim3;
  int eps = 1;
  double rho = 0.0;

  std::array<Jet2, 3> at(double z, double y) const { return slopes(Jet2::variable(z, 0), Jet2::variable(y, 1)); }
};

// Foliation R is the special family y = const; P and Q are the two
// geodesics through each point whose duals lie on the plane section.  P takes
// the + root of the intersection quadratic in 1/P, Q the - root.
SlopeTriple web_from_planes(int eps, const PlaneSection& plane, const Domain& domain = {1.0, 2.0, 0.25, 1.25});

// P from one plane, Q from another (R = 0).  Hexagonal only when the planes
// coincide; used as a negative control.
SlopeTriple web_from_two_planes(int eps, const PlaneSection& plane_p, const PlaneSection& plane_q,
                                const Domain& domain = {1.0, 2.0, 0.25, 1.25});

// Multiply slope `index` by factor(z, y).
SlopeTriple with_slope_factor(const SlopeTriple& t, int index, std::function<Jet2(const Jet2&, const Jet2&)> factor);

// Pointwise residuals, each relative to the magnitude of its terms.
double geodesic_pde_residual(const SlopeTriple& t, double z, double y);   // regime-appropriate system
double hexagonality_residual(const SlopeTriple& t, double z, double y);  // regime-appropriate constraint

struct PfaffReport {
  double max_residual = 0.0;
  std::array<double, 5> per_relation{};  // P_z, Q_z, Q_y, P_yz, P_yy
  ChartPoint witness{};
};

PfaffReport pfaff_consistency(const SlopeTriple& t, int n = 10);

// Max of a pointwise residual over an n x n cell-centred grid.
double max_geodesic_pde_residual(const SlopeTriple& t, int n = 10, ChartPoint* witness = nullptr);
double max_hexagonality_residual(const SlopeTriple& t, int n = 10, ChartPoint* witness = nullptr);

PlaneSection plane_group_action(const PlaneSection& pl, double t1, double t2, double t3);

// [4ac - b^2 : delta^2], scaled to unit length with a non-negative leading entry.
std::array<double, 2> orbit_invariant(const PlaneSection& pl);
double projective_distance(const std::array<double, 2>& x, const std::array<double, 2>& y);

// P solves z P_z = rho P + eps P^3 with P(z0) = P0; Q = -P; R = 0.
SlopeTriple dim2_web(double rho, int eps, double P0, double z0, const Domain& domain = {1.0, 2.0, 0.0, 1.0});

// The stable web with constant slopes exists iff eps rho < 0; returns its
// positive slope.
std::optional<double> constant_slope_web(double rho, int eps);

struct PlaneFit {
  PlaneSection plane;
  double residual = 0.0;  // smallest / largest singular value
};

// Dual points of foliation `index` sampled over an n x n grid.
std::vector<DualPoint> sample_dual_curve(const SlopeTriple& t, int index, int n = 10);
PlaneFit best_fit_plane(const std::vector<DualPoint>& pts);
// Largest |a A + b B + c C + delta D| over normalised points and plane.
double plane_incidence_residual(const PlaneSection& plane, const std::vector<DualPoint>& pts);

// Metrics in the (z, y) chart whose geodesics obey the model equations.
MetricField dual_metric_dim3(int eps, const Domain& domain = {1.0, 2.0, 0.25, 1.25});
MetricField dual_metric_dim2(double rho, int eps, const Domain& domain = {1.0, 2.0, 0.0, 1.0});

Web3Field to_web(const SlopeTriple& t);

}  // namespace hexweb
