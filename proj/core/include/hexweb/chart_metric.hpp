#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hexweb/jet.hpp"

namespace hexweb {

// A point in web-adapted coordinates: u is constant on the first foliation,
// v on the second and w = -u - v on the third.
struct ChartPoint {
  double u = 0.0;
  double v = 0.0;
};

struct MetricJet2 {
  double E = 0, F = 0, G = 0;
  double Eu = 0, Ev = 0, Fu = 0, Fv = 0, Gu = 0, Gv = 0;
  double Euu = 0, Euv = 0, Evv = 0;
  double Fuu = 0, Fuv = 0, Fvv = 0;
  double Guu = 0, Guv = 0, Gvv = 0;
};

// E, F, G as jets in (u, v).
struct MetricJets {
  Jet2 E, F, G;
};

MetricJet2 to_metric_jet(const Jet2& E, const Jet2& F, const Jet2& G);
MetricJets as_jets(const MetricJet2& m);

// Constant metric with vanishing derivatives.
MetricJet2 constant_jet(double E, double F, double G);

double determinant(const MetricJet2& m);
double degeneracy_tol(const MetricJet2& m);

enum class SignatureMode { riemannian, pseudo };

enum class FamilyTag { flat, translation, spiral, dilation, simple_wave, dual_dim3, dual_dim2, custom };

const char* to_string(FamilyTag tag);
const char* to_string(SignatureMode mode);

struct Domain {
  double u0 = 0, u1 = 1, v0 = 0, v1 = 1;

  bool contains(const ChartPoint& p) const;
  ChartPoint center() const;
  // Cell-centred n_u x n_v grid, row-major in u.
  std::vector<ChartPoint> interior_grid(int n_u, int n_v) const;
};

// Throws PositivityViolation or DegenerateMetric when the jet breaks the
// invariants of the requested signature.
void validate_jet(const MetricJet2& m, SignatureMode mode, const ChartPoint& where);

class MetricField {
 public:
  using Evaluator = std::function<MetricJet2(const ChartPoint&)>;

  MetricField(Evaluator eval, Domain domain, FamilyTag tag, SignatureMode mode, std::string name = {});

  MetricJet2 jet(const ChartPoint& p) const { return eval_(p); }
  MetricJet2 checked_jet(const ChartPoint& p) const;

  const Domain& domain() const { return domain_; }
  FamilyTag family() const { return tag_; }
  SignatureMode signature() const { return mode_; }
  const std::string& name() const { return name_; }

  // Free-form numeric parameters recorded for reports.
  const std::map<std::string, double>& parameters() const { return params_; }
  MetricField& set_parameter(const std::string& key, double value);

  MetricField with_domain(const Domain& d) const;
  // The same metric with u and v exchanged (E and G trade places).
  MetricField swapped() const;

 private:
  Evaluator eval_;
  Domain domain_;
  FamilyTag tag_;
  SignatureMode mode_;
  std::string name_;
  std::map<std::string, double> params_;
};

// Wrap a function (Jet2 u, Jet2 v) -> {E, F, G} as an evaluator.
template <class Fn>
MetricField::Evaluator jet_evaluator(Fn fn) {
  return [fn](const ChartPoint& p) {
    const Jet2 u = Jet2::variable(p.u, 0);
    const Jet2 v = Jet2::variable(p.v, 1);
    const std::array<Jet2, 3> efg = fn(u, v);
    return to_metric_jet(efg[0], efg[1], efg[2]);
  };
}

struct ChristoffelSymbols {
  double G111 = 0, G112 = 0, G122 = 0;
  double G211 = 0, G212 = 0, G222 = 0;
};

ChristoffelSymbols christoffel(const MetricJet2& m);
double gaussian_curvature(const MetricJet2& m);

// d^2v/du^2 along a geodesic with slope m = dv/du.
double geodesic_slope_rhs(const MetricJet2& jet, double slope);

// K with d^2v/du^2 = K m (1 + m); only meaningful on solutions of the web
// system, checked against residual_tol (relative).
double reduced_geodesic_coefficient(const MetricJet2& jet, double residual_tol = 1e-6);

MetricJet2 swap_chart(const MetricJet2& m);

}  // namespace hexweb
