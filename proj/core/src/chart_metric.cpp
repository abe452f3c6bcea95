#include "hexweb/chart_metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hexweb/errors.hpp"
#include "hexweb/hydro_system.hpp"

namespace hexweb {

MetricJet2 to_metric_jet(const Jet2& E, const Jet2& F, const Jet2& G) {
  MetricJet2 m;
  m.E = E.value();
  m.F = F.value();
  m.G = G.value();
  m.Eu = E.d(0);
  m.Ev = E.d(1);
  m.Fu = F.d(0);
  m.Fv = F.d(1);
  m.Gu = G.d(0);
  m.Gv = G.d(1);
  m.Euu = E.dd(0, 0);
  m.Euv = E.dd(0, 1);
  m.Evv = E.dd(1, 1);
  m.Fuu = F.dd(0, 0);
  m.Fuv = F.dd(0, 1);
  m.Fvv = F.dd(1, 1);
  m.Guu = G.dd(0, 0);
  m.Guv = G.dd(0, 1);
  m.Gvv = G.dd(1, 1);
  return m;
}

namespace {

Jet2 make_jet(double v, double du, double dv, double duu, double duv, double dvv) {
  Jet2 j(v);
  j.set_d(0, du);
  j.set_d(1, dv);
  j.set_dd(0, 0, duu);
  j.set_dd(0, 1, duv);
  j.set_dd(1, 1, dvv);
  return j;
}

}  // namespace

MetricJets as_jets(const MetricJet2& m) {
  return {make_jet(m.E, m.Eu, m.Ev, m.Euu, m.Euv, m.Evv), make_jet(m.F, m.Fu, m.Fv, m.Fuu, m.Fuv, m.Fvv),
          make_jet(m.G, m.Gu, m.Gv, m.Guu, m.Guv, m.Gvv)};
}

MetricJet2 constant_jet(double E, double F, double G) {
  MetricJet2 m;
  m.E = E;
  m.F = F;
  m.G = G;
  return m;
}

double determinant(const MetricJet2& m) { return m.E * m.G - m.F * m.F; }

double degeneracy_tol(const MetricJet2& m) {
  const double scale = std::max({std::abs(m.E), std::abs(m.F), std::abs(m.G)});
  return 1e-12 * scale * scale;
}

const char* to_string(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::flat: return "flat";
    case FamilyTag::translation: return "translation";
    case FamilyTag::spiral: return "spiral";
    case FamilyTag::dilation: return "dilation";
    case FamilyTag::simple_wave: return "simple_wave";
    case FamilyTag::dual_dim3: return "dual_dim3";
    case FamilyTag::dual_dim2: return "dual_dim2";
    case FamilyTag::custom: return "custom";
  }
  return "custom";
}

const char* to_string(SignatureMode mode) { return mode == SignatureMode::riemannian ? "riemannian" : "pseudo"; }

bool Domain::contains(const ChartPoint& p) const { return p.u >= u0 && p.u <= u1 && p.v >= v0 && p.v <= v1; }

ChartPoint Domain::center() const { return {0.5 * (u0 + u1), 0.5 * (v0 + v1)}; }

std::vector<ChartPoint> Domain::interior_grid(int n_u, int n_v) const {
  std::vector<ChartPoint> pts;
  pts.reserve(static_cast<std::size_t>(n_u) * n_v);
  for (int i = 0; i < n_u; ++i)
    for (int j = 0; j < n_v; ++j)
      pts.push_back({u0 + (i + 0.5) / n_u * (u1 - u0), v0 + (j + 0.5) / n_v * (v1 - v0)});
  return pts;
}

void validate_jet(const MetricJet2& m, SignatureMode mode, const ChartPoint& where) {
  const double W = determinant(m);
  const Witness w{where.u, where.v};
  if (!std::isfinite(W) || !std::isfinite(m.E) || !std::isfinite(m.G)) {
    throw Error(ErrorKind::DegenerateMetric, "non-finite metric value", w);
  }
  if (std::abs(W) <= degeneracy_tol(m)) {
    throw Error(ErrorKind::DegenerateMetric, "EG - F^2 vanishes", w);
  }
  if (mode == SignatureMode::riemannian && (m.E <= 0.0 || W <= 0.0)) {
    std::ostringstream os;
    os << "metric not positive definite (E=" << m.E << ", EG-F^2=" << W << ")";
    throw Error(ErrorKind::PositivityViolation, os.str(), w);
  }
}

MetricField::MetricField(Evaluator eval, Domain domain, FamilyTag tag, SignatureMode mode, std::string name)
    : eval_(std::move(eval)), domain_(domain), tag_(tag), mode_(mode), name_(std::move(name)) {
  if (name_.empty()) name_ = to_string(tag_);
}

MetricJet2 MetricField::checked_jet(const ChartPoint& p) const {
  MetricJet2 m = eval_(p);
  validate_jet(m, mode_, p);
  return m;
}

MetricField& MetricField::set_parameter(const std::string& key, double value) {
  params_[key] = value;
  return *this;
}

MetricField MetricField::with_domain(const Domain& d) const {
  MetricField f = *this;
  f.domain_ = d;
  return f;
}

MetricField MetricField::swapped() const {
  MetricField f = *this;
  Evaluator inner = eval_;
  f.eval_ = [inner](const ChartPoint& p) { return swap_chart(inner({p.v, p.u})); };
  f.domain_ = {domain_.v0, domain_.v1, domain_.u0, domain_.u1};
  return f;
}

MetricJet2 swap_chart(const MetricJet2& m) {
  MetricJet2 s;
  s.E = m.G;
  s.F = m.F;
  s.G = m.E;
  s.Eu = m.Gv;
  s.Ev = m.Gu;
  s.Fu = m.Fv;
  s.Fv = m.Fu;
  s.Gu = m.Ev;
  s.Gv = m.Eu;
  s.Euu = m.Gvv;
  s.Euv = m.Guv;
  s.Evv = m.Guu;
  s.Fuu = m.Fvv;
  s.Fuv = m.Fuv;
  s.Fvv = m.Fuu;
  s.Guu = m.Evv;
  s.Guv = m.Euv;
  s.Gvv = m.Euu;
  return s;
}

namespace {

double checked_det(const MetricJet2& m) {
  const double W = determinant(m);
  if (!(std::abs(W) > degeneracy_tol(m))) throw Error(ErrorKind::DegenerateMetric, "EG - F^2 vanishes");
  return W;
}

}  // namespace

ChristoffelSymbols christoffel(const MetricJet2& m) {
  const double W2 = 2.0 * checked_det(m);
  ChristoffelSymbols c;
  c.G111 = (m.G * m.Eu - 2.0 * m.F * m.Fu + m.F * m.Ev) / W2;
  c.G211 = (2.0 * m.E * m.Fu - m.E * m.Ev - m.F * m.Eu) / W2;
  c.G112 = (m.G * m.Ev - m.F * m.Gu) / W2;
  c.G212 = (m.E * m.Gu - m.F * m.Ev) / W2;
  c.G122 = (2.0 * m.G * m.Fv - m.G * m.Gu - m.F * m.Gv) / W2;
  c.G222 = (m.E * m.Gv - 2.0 * m.F * m.Fv + m.F * m.Gu) / W2;
  return c;
}

namespace {

double det3(const double a[3][3]) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

}  // namespace

// Brioschi formula.
double gaussian_curvature(const MetricJet2& m) {
  const double W = checked_det(m);
  const double a[3][3] = {
      {-0.5 * m.Evv + m.Fuv - 0.5 * m.Guu, 0.5 * m.Eu, m.Fu - 0.5 * m.Ev},
      {m.Fv - 0.5 * m.Gu, m.E, m.F},
      {0.5 * m.Gv, m.F, m.G},
  };
  const double b[3][3] = {
      {0.0, 0.5 * m.Ev, 0.5 * m.Gu},
      {0.5 * m.Ev, m.E, m.F},
      {0.5 * m.Gu, m.F, m.G},
  };
  return (det3(a) - det3(b)) / (W * W);
}

double geodesic_slope_rhs(const MetricJet2& jet, double slope) {
  const ChristoffelSymbols c = christoffel(jet);
  const double s = slope;
  return -c.G211 + (c.G111 - 2.0 * c.G212) * s - (c.G222 - 2.0 * c.G112) * s * s + c.G122 * s * s * s;
}

double reduced_geodesic_coefficient(const MetricJet2& jet, double residual_tol) {
  const double W = checked_det(jet);
  const HydroResidual r = hydro_residual(jet);
  if (r.max_abs() > residual_tol * hydro_residual_scale(jet)) {
    throw Error(ErrorKind::NotWebAdapted, "metric jet does not solve the web system");
  }
  return (jet.G * jet.Eu + 3.0 * jet.F * jet.Ev - 2.0 * jet.F * jet.Fu - 2.0 * jet.E * jet.Gu) / (2.0 * W);
}

}  // namespace hexweb
