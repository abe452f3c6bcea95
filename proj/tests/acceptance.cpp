// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.  Family seeds come from the shipped configs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hexweb/duality.hpp"
#include "hexweb/errors.hpp"
#include "hexweb/generators.hpp"
#include "hexweb/geodesic_flow.hpp"
#include "hexweb/hydro_system.hpp"
#include "hexweb/io/config.hpp"
#include "hexweb/io/pipeline.hpp"
#include "hexweb/web3.hpp"
#include "oracles.hpp"

using namespace hexweb;
namespace fs = std::filesystem;

namespace {

io::RunConfig config(const std::string& name) { return io::load_config(fs::path(HEXWEB_CONFIG_DIR) / (name + ".toml")); }

MetricField metric(const std::string& name) { return *io::build_family(config(name).family).metric; }

// Collects sub-results of one criterion; the first failure is kept as the
// explanation.
class Criterion {
 public:
  explicit Criterion(int id, const char* title) : id_(id), title_(title) {}

  void expect(bool ok, const std::string& what) {
    if (!ok && why_.empty()) why_ = what;
    ok_ = ok_ && ok;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }

  bool report() const {
    std::printf("criterion %2d %s: %s", id_, ok_ ? "PASS" : "FAIL", title_);
    if (!notes_.empty()) std::printf(" [%s]", notes_.c_str());
    if (!ok_) std::printf(" -- %s", why_.c_str());
    std::printf("\n");
    std::fflush(stdout);
    return ok_;
  }

  // Runs body; a module error fails the criterion instead of aborting.
  Criterion& run(const std::function<void(Criterion&)>& body) {
    try {
      body(*this);
    } catch (const std::exception& e) {
      expect(false, std::string("error: ") + e.what());
    }
    return *this;
  }

 private:
  int id_;
  const char* title_;
  bool ok_ = true;
  std::string why_, notes_;
};

std::string fmt(const char* name, double x) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s=%.3g", name, x);
  return buf;
}

double max_relative_residual(const MetricField& f) {
  double worst = 0.0;
  for (const auto& p : f.domain().interior_grid(20, 20)) {
    const MetricJet2 m = f.checked_jet(p);
    worst = std::max(worst, hydro_residual(m).max_abs() / hydro_residual_scale(m));
  }
  return worst;
}

CubicForm calibrated(const MetricField& f) {
  CalibrationOptions o;
  o.bracket_tol = 1e-8;
  return cubic_integral_from_solution(f, o);
}

void speeds(Criterion& c) {
  std::mt19937_64 rng(2024);
  double id = 0.0, vi = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const auto g = oracle::random_spd(rng);
    const CharSpeeds s = characteristic_speeds(g[0], g[1], g[2]);
    id = std::max(id, lambdas_identity_residual(s));
    vi = std::max(vi, vieta_residual(g[0], g[1], g[2], s));
  }
  c.note(fmt("identity", id));
  c.note(fmt("vieta", vi));
  c.expect(id < 1e-10, "speed identity");
  c.expect(vi < 1e-10, "Vieta relations");
  const auto r = characteristic_speeds(1.0, 0.0, 1.0).real();
  const double ref[3] = {-1.0, (3.0 - std::sqrt(5.0)) / 2.0, (3.0 + std::sqrt(5.0)) / 2.0};
  double flat = 0.0;
  for (int i = 0; i < 3; ++i) flat = std::max(flat, std::abs(r[i] - ref[i]));
  c.note(fmt("flat_roots", flat));
  c.expect(flat < 1e-12, "flat roots");
}

void residuals(Criterion& c) {
  const double t = max_relative_residual(metric("translation"));
  c.note(fmt("translation", t));
  c.expect(t < 1e-9, "translation residual");
  for (const char* name : {"spiral", "dilation", "dilation_a", "dilation_b", "dilation_c", "dilation_degenerate",
                           "simple_wave"}) {
    const double r = max_relative_residual(metric(name));
    c.note(fmt(name, r));
    c.expect(r < 1e-6, std::string(name) + " residual");
  }
}

void integral(Criterion& c) {
  for (const char* name : {"translation", "spiral", "dilation"}) {
    const MetricField f = metric(name);
    const CubicForm I = calibrated(f);
    double br = 0.0;
    for (const PhasePoint& x : sample_phase_points(f, 10, 11)) {
      br = std::max(br, std::abs(poisson_bracket(f, I, Hamiltonian{}, x)));
    }
    const ConservationReport cr = conservation_report(f, I, 100, {}, 1);
    const MuDecision& mu = I.mu();
    c.note(std::string(name) + " mu=" + to_string(mu.status) + "/" + std::to_string(mu.exponent));
    c.note(fmt("bracket", br));
    c.note(fmt("drift", cr.max_rel_drift));
    c.expect(br < 1e-8, std::string(name) + " bracket");
    c.expect(cr.max_rel_drift < 1e-8 && cr.failures == 0, std::string(name) + " drift");
    if (mu.status == MuDecision::Status::resolved) {
      const double chosen = mu.exponent == 2 ? mu.residual_m2 : mu.residual_m1;
      const double rejected = mu.exponent == 2 ? mu.residual_m1 : mu.residual_m2;
      const double orders = std::log10(rejected / std::max(chosen, 1e-300));
      c.note(fmt("separation_orders", orders));
      c.expect(orders >= 5.0, std::string(name) + " exponent separation");
    }
  }
}

void webs(Criterion& c) {
  for (const char* name : {"translation", "spiral", "dilation"}) {
    const MetricField f = metric(name);
    const Web3Field w = web_from_cubic_integral(f, calibrated(f));
    const Web3Field control = w.with_bilinear_slope_perturbation(w.most_oblique_foliation(), 0.5);
    const double kb = max_blaschke_curvature(w, 20, 20);
    const double kc = max_blaschke_curvature(control, 20, 20);
    const ChartPoint p0 = f.domain().center();
    const double d = hexagon_closure_defect(f, w, p0, 0.1, {});
    const double dc = hexagon_closure_defect(f, control, p0, 0.1, {});
    c.note(std::string(name) + " " + fmt("K_B", kb) + " " + fmt("closure", d));
    c.expect(kb < 1e-7, std::string(name) + " Blaschke curvature");
    c.expect(d < 1e-7, std::string(name) + " hexagon closure");
    c.expect(kc > 1e-4, std::string(name) + " control Blaschke curvature");
    c.expect(dc > 1e-4, std::string(name) + " control closure");
  }
}

std::pair<double, double> curvature_range(const MetricField& f) {
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (const auto& p : f.domain().interior_grid(20, 20)) {
    const double K = gaussian_curvature(f.checked_jet(p));
    lo = std::min(lo, K);
    hi = std::max(hi, K);
  }
  return {lo, hi};
}

void curvature(Criterion& c) {
  {
    const auto spec = std::get<TranslationFamilySpec>(config("translation").family);
    const MetricField f = make_translation_family(spec);
    double dev = 0.0;
    for (const auto& p : f.domain().interior_grid(20, 20)) {
      const double K = gaussian_curvature(f.jet(p));
      dev = std::max(dev, std::abs(translation_family_curvature(spec.h, spec.f0, p.v - p.u) - K) / (1 + std::abs(K)));
    }
    c.note(fmt("translation", dev));
    c.expect(dev < 1e-8, "translation printed curvature");
  }
  const auto spiral = std::get<OdeFamilySpec>(config("spiral").family);
  {
    const MetricField f = make_spiral_family(spiral);
    double dev = 0.0;
    for (const auto& p : f.domain().interior_grid(20, 20)) {
      const MetricJet2 m = f.jet(p);
      const double g = std::exp(p.u), K = gaussian_curvature(m);
      dev = std::max(dev, std::abs(spiral_family_curvature(spiral.kappa, p.u, m.E / g, m.G / g, m.F / g) - K) /
                              (1 + std::abs(K)));
    }
    c.note(fmt("spiral", dev));
    c.expect(dev < 1e-6, "spiral closed form");
  }
  for (double kappa : {0.0, -1.0}) {
    OdeFamilySpec s = spiral;
    s.kappa = kappa;
    const auto [lo, hi] = curvature_range(make_spiral_family(s));
    const double k = std::max(std::abs(lo), std::abs(hi));
    c.note(fmt(kappa == 0.0 ? "spiral_k0" : "spiral_k-1", k));
    c.expect(k < 1e-9, "flat spiral");
  }
  {
    OdeFamilySpec s = std::get<OdeFamilySpec>(config("dilation").family);
    s.kappa = 0.0;
    const auto [lo, hi] = curvature_range(make_dilation_family(s));
    const double k = std::max(std::abs(lo), std::abs(hi));
    c.note(fmt("dilation_k0", k));
    c.expect(k < 1e-9, "flat dilation");
  }
  const double printed_expected[3] = {-0.395061728395062, -0.262345679012346, -0.64};
  const char* branches[3] = {"dilation_a", "dilation_b", "dilation_c"};
  for (int i = 0; i < 3; ++i) {
    const auto s = std::get<OdeFamilySpec>(config(branches[i]).family);
    const MetricField f = make_dilation_family(s);
    const MetricJet2 m0 = f.jet({1.0, s.s0});
    const double printed = dilation_branch_curvature(s.constraint, s.s0, m0.E, m0.G, m0.F);
    const auto [lo, hi] = curvature_range(f);
    const double dev = std::max(std::abs(lo - printed), std::abs(hi - printed));
    c.note(std::string(branches[i]) + " " + fmt("K", printed) + " " + fmt("dev", dev));
    c.expect(std::abs(printed - printed_expected[i]) < 1e-9, std::string(branches[i]) + " printed value");
    c.expect(hi - lo < 1e-8 && dev < 1e-8, std::string(branches[i]) + " constant curvature");
  }
}

void dim3(Criterion& c) {
  const auto spec = std::get<io::DualDim3Family>(config("dual_dim3").family);
  const SlopeTriple t = web_from_planes(spec.eps, spec.plane, spec.domain);
  const double pde = max_geodesic_pde_residual(t, 10), hex = max_hexagonality_residual(t, 10);
  const double pf = pfaff_consistency(t, 10).max_residual;
  const PlaneFit fit = best_fit_plane(sample_dual_curve(t, 0, 10));
  const double q = plane_incidence_residual(fit.plane, sample_dual_curve(t, 1, 10));
  c.note(fmt("pde", pde));
  c.note(fmt("hex", hex));
  c.note(fmt("pfaff", pf));
  c.note(fmt("plane_fit", std::max(fit.residual, q)));
  c.expect(pde < 1e-8, "geodesic system");
  c.expect(hex < 1e-8, "hexagonality");
  c.expect(pf < 1e-6, "Pfaff consistency");
  c.expect(fit.residual < 1e-7 && q < 1e-7, "focal curves planar");
  PlaneSection other = spec.plane;
  other.delta *= 1.5;
  const double control = max_hexagonality_residual(web_from_two_planes(spec.eps, spec.plane, other, spec.domain), 10);
  c.note(fmt("control", control));
  c.expect(control > 1e-3, "non-coplanar control");
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double inv = 0.0;
  for (int n = 0; n < 100; ++n) {
    const PlaneSection p{u(rng), u(rng), u(rng), u(rng)};
    const PlaneSection g = plane_group_action(p, u(rng), u(rng), u(rng));
    inv = std::max(inv, projective_distance(orbit_invariant(p), orbit_invariant(g)));
  }
  c.note(fmt("orbit_invariant", inv));
  c.expect(inv < 1e-10, "group invariant");
}

void dim2(Criterion& c) {
  const auto spec = std::get<io::DualDim2Family>(config("dual_dim2").family);
  const SlopeTriple t = dim2_web(spec.rho, spec.eps, spec.P0, spec.z0, spec.domain);
  const double pde = max_geodesic_pde_residual(t, 10), hex = max_hexagonality_residual(t, 10);
  c.note(fmt("pde", pde));
  c.note(fmt("hex", hex));
  c.expect(pde < 1e-10 && hex < 1e-10, "dim-2 residuals");
  for (double rho : {1.5, -1.5}) {
    for (int eps : {1, -1}) {
      c.expect(constant_slope_web(rho, eps).has_value() == (eps * rho < 0.0), "constant-slope existence");
    }
  }
  for (double rho : {1.0, -0.5}) {
    bool rejected = false;
    try {
      dim2_web(rho, spec.eps, spec.P0, spec.z0, spec.domain);
    } catch (const Error& e) {
      rejected = e.kind() == ErrorKind::ExcludedRho;
    }
    c.expect(rejected, "excluded rho accepted");
  }
}

void simple_wave(Criterion& c) {
  const MetricField f = metric("simple_wave");
  double r1lo = HUGE_VAL, r1hi = -HUGE_VAL, r2lo = HUGE_VAL, r2hi = -HUGE_VAL, rank = 0.0;
  for (const auto& p : f.domain().interior_grid(20, 20)) {
    const MetricJet2 m = f.jet(p);
    const RiemannInvariants R = riemann_invariants(m.F, characteristic_speeds(m));
    r1lo = std::min(r1lo, R.R1);
    r1hi = std::max(r1hi, R.R1);
    r2lo = std::min(r2lo, R.R2);
    r2hi = std::max(r2hi, R.R2);
    Eigen::Matrix<double, 3, 2> J;
    J << m.Eu, m.Ev, m.Fu, m.Fv, m.Gu, m.Gv;
    const Eigen::Vector2d sv = J.jacobiSvd().singularValues();
    rank = std::max(rank, sv[0] > 0.0 ? sv[1] / sv[0] : 0.0);
  }
  const double s1 = (r1hi - r1lo) / (1 + std::abs(r1lo)), s2 = (r2hi - r2lo) / (1 + std::abs(r2lo));
  c.note(fmt("R1_spread", s1));
  c.note(fmt("R2_spread", s2));
  c.note(fmt("rank", rank));
  c.expect(s1 < 1e-7 && s2 < 1e-7, "frozen invariants");
  c.expect(rank < 1e-6, "one-dimensional hodograph");
  const CubicForm I = calibrated(f);
  const double br = max_bracket_residual(f, I);
  const ConservationReport cr = conservation_report(f, I, 100, {}, 1);
  const Web3Field w = web_from_cubic_integral(f, I);
  const double kb = max_blaschke_curvature(w, 20, 20);
  const double d = hexagon_closure_defect(f, w, f.domain().center(), 0.1, {});
  c.note(fmt("bracket", br));
  c.note(fmt("drift", cr.max_rel_drift));
  c.note(fmt("K_B", kb));
  c.note(fmt("closure", d));
  c.expect(br < 1e-8 && cr.max_rel_drift < 1e-8 && cr.failures == 0, "integral on the simple wave");
  c.expect(kb < 1e-7 && d < 1e-7, "hexagonal web on the simple wave");
}

void semih(Criterion& c) {
  const MetricField f = metric("dilation");
  const Domain& d = f.domain();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.25, 0.75);
  double fine = 0.0, coarse = 0.0;
  for (int n = 0; n < 10; ++n) {
    const ChartPoint p{d.u0 + unit(rng) * (d.u1 - d.u0), d.v0 + unit(rng) * (d.v1 - d.v0)};
    for (const auto& q : {std::array{0, 1, 2}, std::array{1, 2, 0}, std::array{2, 0, 1}}) {
      fine = std::max(fine, std::abs(semi_hamiltonian_residual(f, p, q[0], q[1], q[2], 1e-4)));
      coarse = std::max(coarse, std::abs(semi_hamiltonian_residual(f, p, q[0], q[1], q[2], 4e-4)));
    }
  }
  c.note(fmt("fine", fine));
  c.note(fmt("coarse", coarse));
  c.expect(fine < 1e-4, "semi-Hamiltonian residual");
  c.expect(fine <= coarse || fine < 1e-9, "refinement does not shrink the residual");
}

void lie(Criterion& c) {
  const MetricField f = metric("spiral");
  const LieSpiralImmersion imm = immerse_lie_spiral(f, 2.0);
  const double mm = lie_pullback_mismatch(imm, f, 50);
  c.note(fmt("mismatch", mm));
  c.expect(mm < 1e-6, "pullback mismatch");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism(Criterion& c) {
  const fs::path root = fs::temp_directory_path() / "hexweb_acceptance";
  std::string first;
  for (int k = 0; k < 2; ++k) {
    io::RunConfig cfg = config("translation");
    cfg.output.dir = root / ("run" + std::to_string(k));
    fs::remove_all(cfg.output.dir);
    io::run_pipeline(cfg);
    const std::string text = slurp(cfg.output.dir / cfg.output.report);
    c.expect(!text.empty(), "empty report");
    if (k == 0) first = text;
    else c.expect(text == first, "reports differ");
  }
}

}  // namespace

int main() {
  bool ok = true;
  ok &= Criterion(1, "characteristic speeds").run(speeds).report();
  ok &= Criterion(2, "web system residuals").run(residuals).report();
  ok &= Criterion(3, "cubic integral").run(integral).report();
  ok &= Criterion(4, "hexagonal webs and controls").run(webs).report();
  ok &= Criterion(5, "Gaussian curvature").run(curvature).report();
  ok &= Criterion(6, "three-parameter dual webs").run(dim3).report();
  ok &= Criterion(7, "two-parameter dual webs").run(dim2).report();
  ok &= Criterion(8, "simple waves").run(simple_wave).report();
  ok &= Criterion(9, "semi-Hamiltonian property").run(semih).report();
  ok &= Criterion(10, "Lie spiral immersion").run(lie).report();
  ok &= Criterion(11, "deterministic reports").run(determinism).report();
  return ok ? 0 : 1;
}
