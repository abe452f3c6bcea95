#include "hexweb/io/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

#include <Eigen/Dense>

#include "hexweb/generators.hpp"
#include "hexweb/geodesic_flow.hpp"
#include "hexweb/hydro_system.hpp"
#include "hexweb/io/csv.hpp"
#include "hexweb/io/svg.hpp"
#include "hexweb/parallel.hpp"
#include "hexweb/web3.hpp"

namespace hexweb::io {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Json domain_json(const Domain& d) { return Json::array({d.u0, d.u1, d.v0, d.v1}); }

Json witness_json(const Witness& w) {
  Json j = Json::object();
  j["u"] = w.u;
  j["v"] = w.v;
  return j;
}

Json profile_json(const Profile& p) {
  Json j = Json::object();
  j["kind"] = to_string(p.kind());
  j["params"] = p.params();
  return j;
}

// Thresholds for the checks, pinned to the acceptance tolerances.
constexpr double kAnalyticPdeTol = 1e-9;
constexpr double kNumericPdeTol = 1e-6;
constexpr double kBracketTol = 1e-8;
constexpr double kDriftTol = 1e-8;
constexpr double kMuSeparationOrders = 5.0;
constexpr double kBlaschkeTol = 1e-7;
constexpr double kClosureTol = 1e-7;
constexpr double kControlFloor = 1e-4;
constexpr double kFlatTol = 1e-9;
constexpr double kPrintedCurvatureTol = 1e-8;
constexpr double kClosedFormCurvatureTol = 1e-6;
constexpr double kConstantCurvatureTol = 1e-8;
constexpr double kSemihTol = 1e-4;
constexpr double kInvariantSpreadTol = 1e-7;
constexpr double kHodographRankTol = 1e-6;
constexpr double kDim3Tol = 1e-8;
constexpr double kDim2Tol = 1e-10;
constexpr double kPfaffTol = 1e-6;
constexpr double kPlanarityTol = 1e-7;

bool analytic_family(const FamilySpec& f) {
  return std::holds_alternative<FlatFamily>(f) || std::holds_alternative<TranslationFamilySpec>(f) ||
         std::holds_alternative<ConstantCurvatureFamily>(f);
}

// Lazily computed objects shared between the checks of one run.
class Context {
 public:
  Context(const RunConfig& cfg, const BuiltFamily& fam) : cfg_(cfg), fam_(fam) {}

  const RunConfig& cfg() const { return cfg_; }
  const MetricField& field() const { return *fam_.metric; }
  const SlopeTriple& dual() const { return *fam_.dual; }

  const CubicForm& integral() {
    if (!integral_) {
      CalibrationOptions opts;
      opts.bracket_tol = kBracketTol;
      integral_ = cubic_integral_from_solution(field(), opts);
    }
    return *integral_;
  }

  const Web3Field& web() {
    if (!web_) web_ = web_from_cubic_integral(field(), integral());
    return *web_;
  }

  Web3Field control() {
    return web().with_bilinear_slope_perturbation(web().most_oblique_foliation(), cfg_.verify.control_amplitude);
  }

  bool has_integral() const { return integral_.has_value(); }

 private:
  const RunConfig& cfg_;
  const BuiltFamily& fam_;
  std::optional<CubicForm> integral_;
  std::optional<Web3Field> web_;
};

// Evaluates fn on every grid point; returns the values in grid order.  The
// first error in grid order is rethrown so failures are reproducible.
template <class Fn>
std::vector<double> grid_values(const std::vector<ChartPoint>& grid, Fn fn) {
  std::vector<double> out(grid.size(), 0.0);
  std::vector<std::optional<Error>> errors(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    try {
      out[i] = fn(grid[i]);
    } catch (const Error& e) {
      errors[i] = Error(e.kind(), e.detail(), e.witness() ? e.witness() : Witness{grid[i].u, grid[i].v});
    }
  });
  for (auto& e : errors) {
    if (e) throw *e;
  }
  return out;
}

std::size_t argmax_abs(const std::vector<double>& v) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[k]) || !std::isfinite(v[i])) k = i;
  }
  return k;
}

void check_pde(Context& cx, CheckResult& r) {
  const MetricField& f = cx.field();
  const auto grid = f.domain().interior_grid(cx.cfg().grid.nu, cx.cfg().grid.nv);
  const auto res = grid_values(grid, [&f](const ChartPoint& p) {
    const MetricJet2 m = f.checked_jet(p);
    return hydro_residual(m).max_abs() / hydro_residual_scale(m);
  });
  const std::size_t k = argmax_abs(res);
  const double tol = analytic_family(cx.cfg().family) ? kAnalyticPdeTol : kNumericPdeTol;
  r.metrics["max_relative_residual"] = res[k];
  r.metrics["tolerance"] = tol;
  r.metrics["grid"] = Json::array({cx.cfg().grid.nu, cx.cfg().grid.nv});
  r.witness = Witness{grid[k].u, grid[k].v};
  r.passed = res[k] < tol;
}

void check_integral(Context& cx, CheckResult& r, std::optional<Json>* mu_out) {
  const CubicForm& I = cx.integral();
  const MuDecision& mu = I.mu();
  Json mj = Json::object();
  mj["status"] = to_string(mu.status);
  mj["exponent"] = mu.exponent;
  mj["rejected_exponent"] = mu.exponent == 2 ? 1 : 2;
  mj["residual_m1"] = mu.residual_m1;
  mj["residual_m2"] = mu.residual_m2;
  const double chosen = mu.exponent == 2 ? mu.residual_m2 : mu.residual_m1;
  const double rejected = mu.exponent == 2 ? mu.residual_m1 : mu.residual_m2;
  const double orders = std::log10(rejected / std::max(chosen, 1e-300));
  mj["separation_orders"] = mu.status == MuDecision::Status::resolved ? Json(orders) : Json(nullptr);
  if (mu_out) *mu_out = mj;

  const double br = max_bracket_residual(cx.field(), I);
  const auto& c = cx.cfg();
  const ConservationReport cr = conservation_report(cx.field(), I, c.verify.trajectories, c.integrator, c.seed, c.verify.t_span);
  r.metrics["max_bracket"] = br;
  r.metrics["bracket_tolerance"] = kBracketTol;
  r.metrics["max_rel_drift"] = cr.max_rel_drift;
  r.metrics["drift_tolerance"] = kDriftTol;
  r.metrics["trajectories"] = c.verify.trajectories;
  r.metrics["failed_trajectories"] = cr.failures;
  r.metrics["mu_exponent"] = mu.exponent;
  r.metrics["mu_status"] = to_string(mu.status);
  bool ok = br < kBracketTol && cr.max_rel_drift < kDriftTol && cr.failures == 0;
  if (mu.status == MuDecision::Status::resolved) ok = ok && orders >= kMuSeparationOrders;
  const TrajectoryDrift* worst = nullptr;
  for (const auto& t : cr.per_trajectory) {
    if (!t.error.empty()) {
      worst = &t;
      break;
    }
    if (!worst || t.rel_drift > worst->rel_drift) worst = &t;
  }
  if (worst) r.witness = Witness{worst->start.u, worst->start.v};
  r.passed = ok;
}

void check_blaschke(Context& cx, CheckResult& r) {
  ChartPoint w;
  const int nu = cx.cfg().grid.nu, nv = cx.cfg().grid.nv;
  const double kb = max_blaschke_curvature(cx.web(), nu, nv, &w);
  const double kc = max_blaschke_curvature(cx.control(), nu, nv);
  r.metrics["max_abs_K_B"] = kb;
  r.metrics["tolerance"] = kBlaschkeTol;
  r.metrics["control_max_abs_K_B"] = kc;
  r.metrics["control_floor"] = kControlFloor;
  r.witness = Witness{w.u, w.v};
  r.passed = kb < kBlaschkeTol && kc > kControlFloor;
}

void check_closure(Context& cx, CheckResult& r) {
  const auto& c = cx.cfg();
  const ChartPoint p0 = cx.field().domain().center();
  const double d = hexagon_closure_defect(cx.field(), cx.web(), p0, c.verify.hexagon_eps, c.integrator);
  const double dc = hexagon_closure_defect(cx.field(), cx.control(), p0, c.verify.hexagon_eps, c.integrator);
  r.metrics["defect"] = d;
  r.metrics["tolerance"] = kClosureTol;
  r.metrics["eps"] = c.verify.hexagon_eps;
  r.metrics["control_defect"] = dc;
  r.metrics["control_floor"] = kControlFloor;
  r.witness = Witness{p0.u, p0.v};
  r.passed = d < kClosureTol && dc > kControlFloor;
}

void check_curvature(Context& cx, CheckResult& r) {
  const MetricField& f = cx.field();
  const auto& cfg = cx.cfg();
  const auto grid = f.domain().interior_grid(cfg.grid.nu, cfg.grid.nv);
  const auto K = grid_values(grid, [&f](const ChartPoint& p) { return gaussian_curvature(f.checked_jet(p)); });
  const auto [lo, hi] = std::minmax_element(K.begin(), K.end());
  r.metrics["min_K_G"] = *lo;
  r.metrics["max_K_G"] = *hi;
  r.metrics["spread"] = *hi - *lo;
  bool finite = std::all_of(K.begin(), K.end(), [](double x) { return std::isfinite(x); });

  auto flat = [&] {
    const std::size_t k = argmax_abs(K);
    r.metrics["expectation"] = "flat";
    r.metrics["tolerance"] = kFlatTol;
    r.witness = Witness{grid[k].u, grid[k].v};
    r.passed = std::abs(K[k]) < kFlatTol;
  };
  // Max deviation between the oracle and a closed form, relative to 1 + |K|.
  auto compare = [&](const char* what, double tol, auto printed) {
    const auto dev = grid_values(grid, [&](const ChartPoint& p) {
      const double oracle = gaussian_curvature(f.jet(p));
      return (printed(p) - oracle) / (1.0 + std::abs(oracle));
    });
    const std::size_t k = argmax_abs(dev);
    r.metrics["expectation"] = what;
    r.metrics["max_deviation"] = std::abs(dev[k]);
    r.metrics["tolerance"] = tol;
    r.witness = Witness{grid[k].u, grid[k].v};
    r.passed = finite && std::abs(dev[k]) < tol;
  };

  if (std::holds_alternative<FlatFamily>(cfg.family)) return flat();
  if (const auto* c = std::get_if<ConstantCurvatureFamily>(&cfg.family)) {
    const double expected = c->kind == CurvatureKind::flat ? 0.0 : c->kind == CurvatureKind::sphere ? 1.0 : -1.0;
    return compare("constant", kConstantCurvatureTol, [expected](const ChartPoint&) { return expected; });
  }
  if (const auto* t = std::get_if<TranslationFamilySpec>(&cfg.family)) {
    return compare("printed closed form", kPrintedCurvatureTol,
                   [t](const ChartPoint& p) { return translation_family_curvature(t->h, t->f0, p.v - p.u); });
  }
  if (const auto* s = std::get_if<OdeFamilySpec>(&cfg.family)) {
    const double kappa = f.parameters().at("kappa");
    if (s->family == OdeFamilySpec::Family::spiral) {
      if (kappa == 0.0 || kappa == -1.0) return flat();
      return compare("printed closed form", kClosedFormCurvatureTol, [&f, kappa](const ChartPoint& p) {
        const MetricJet2 m = f.jet(p);
        const double g = std::exp(p.u);
        return spiral_family_curvature(kappa, p.u, m.E / g, m.G / g, m.F / g);
      });
    }
    if (s->constraint != OdeFamilySpec::Constraint::none) {
      // Constant curvature equal to the printed value at the initial point.
      const MetricJet2 m0 = f.jet({1.0, s->s0});
      const double printed = dilation_branch_curvature(s->constraint, s->s0, m0.E, m0.G, m0.F);
      double dev = 0.0;
      std::size_t k = 0;
      for (std::size_t i = 0; i < K.size(); ++i) {
        const double d = std::abs(K[i] - printed) / (1.0 + std::abs(printed));
        if (d > dev || !std::isfinite(d)) {
          dev = d;
          k = i;
        }
      }
      r.metrics["expectation"] = "constant, printed value";
      r.metrics["printed_K_G"] = printed;
      r.metrics["max_deviation"] = dev;
      r.metrics["tolerance"] = kConstantCurvatureTol;
      r.witness = Witness{grid[k].u, grid[k].v};
      r.passed = finite && dev < kConstantCurvatureTol && (*hi - *lo) < kConstantCurvatureTol;
      return;
    }
    if (kappa == 0.0 && !s->degenerate_branch) return flat();
  }
  r.metrics["expectation"] = "reported";
  r.passed = finite;
}

void check_semih(Context& cx, CheckResult& r) {
  const MetricField& f = cx.field();
  const Domain& d = f.domain();
  std::mt19937_64 rng(cx.cfg().seed);
  std::uniform_real_distribution<double> unit(0.25, 0.75);
  std::vector<ChartPoint> pts;
  for (int i = 0; i < cx.cfg().verify.probe_points; ++i) {
    const double a = unit(rng), b = unit(rng);
    pts.push_back({d.u0 + a * (d.u1 - d.u0), d.v0 + b * (d.v1 - d.v0)});
  }
  constexpr int perms[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
  auto worst_at = [&](double step) {
    return grid_values(pts, [&](const ChartPoint& p) {
      double w = 0.0;
      for (const auto& q : perms) w = std::max(w, std::abs(semi_hamiltonian_residual(f, p, q[0], q[1], q[2], step)));
      return w;
    });
  };
  const auto coarse = worst_at(4e-4);
  const auto fine = worst_at(1e-4);
  const std::size_t k = argmax_abs(fine);
  const double mc = *std::max_element(coarse.begin(), coarse.end());
  r.metrics["max_residual"] = fine[k];
  r.metrics["max_residual_coarse"] = mc;
  r.metrics["tolerance"] = kSemihTol;
  r.metrics["points"] = static_cast<int>(pts.size());
  r.witness = Witness{pts[k].u, pts[k].v};
  // Refinement must not make things worse; at round-off level both are tiny.
  const bool shrinks = fine[k] <= mc || fine[k] < 1e-9;
  r.metrics["shrinks_under_refinement"] = shrinks;
  r.passed = fine[k] < kSemihTol && shrinks;
}

void check_hodograph(Context& cx, CheckResult& r) {
  const MetricField& f = cx.field();
  const auto grid = f.domain().interior_grid(cx.cfg().grid.nu, cx.cfg().grid.nv);
  std::vector<RiemannInvariants> R(grid.size());
  std::vector<double> rank(grid.size());
  grid_values(grid, [&](const ChartPoint& p) {
    const MetricJet2 m = f.jet(p);
    const std::size_t i = static_cast<std::size_t>(&p - grid.data());
    R[i] = riemann_invariants(m.F, characteristic_speeds(m));
    Eigen::Matrix<double, 3, 2> J;
    J << m.Eu, m.Ev, m.Fu, m.Fv, m.Gu, m.Gv;
    const Eigen::Vector2d sv = J.jacobiSvd().singularValues();
    rank[i] = sv[0] > 0.0 ? sv[1] / sv[0] : 0.0;
    return 0.0;
  });
  double r1lo = HUGE_VAL, r1hi = -HUGE_VAL, r2lo = HUGE_VAL, r2hi = -HUGE_VAL;
  for (const auto& x : R) {
    r1lo = std::min(r1lo, x.R1);
    r1hi = std::max(r1hi, x.R1);
    r2lo = std::min(r2lo, x.R2);
    r2hi = std::max(r2hi, x.R2);
  }
  const double s1 = (r1hi - r1lo) / (1.0 + std::abs(R.front().R1));
  const double s2 = (r2hi - r2lo) / (1.0 + std::abs(R.front().R2));
  const std::size_t k = argmax_abs(rank);

  // Global principal components of the (E, F, G) cloud, reported only: the
  // curve is bent, so its second component measures curvature, not rank.
  Eigen::MatrixXd X(static_cast<Eigen::Index>(grid.size()), 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const MetricJet2 m = f.jet(grid[i]);
    X.row(static_cast<Eigen::Index>(i)) << m.E, m.F, m.G;
  }
  const Eigen::MatrixXd C = X.rowwise() - X.colwise().mean();
  const Eigen::Vector3d pc = Eigen::JacobiSVD<Eigen::MatrixXd>(C).singularValues();

  r.metrics["R1_spread"] = s1;
  r.metrics["R2_spread"] = s2;
  r.metrics["spread_tolerance"] = kInvariantSpreadTol;
  r.metrics["max_local_rank_ratio"] = rank[k];
  r.metrics["rank_tolerance"] = kHodographRankTol;
  r.metrics["global_pc_ratio"] = pc[0] > 0.0 ? pc[1] / pc[0] : 0.0;
  r.witness = Witness{grid[k].u, grid[k].v};
  r.passed = s1 < kInvariantSpreadTol && s2 < kInvariantSpreadTol && rank[k] < kHodographRankTol;
}

double dual_tol(const SlopeTriple& t) { return t.regime == DualRegime::dim3 ? kDim3Tol : kDim2Tol; }

void check_dual_pde(Context& cx, CheckResult& r) {
  ChartPoint w;
  const double res = max_geodesic_pde_residual(cx.dual(), cx.cfg().grid.nu, &w);
  r.metrics["max_relative_residual"] = res;
  r.metrics["tolerance"] = dual_tol(cx.dual());
  r.witness = Witness{w.u, w.v};
  r.passed = res < dual_tol(cx.dual());
}

void check_hexagonality(Context& cx, CheckResult& r) {
  ChartPoint w;
  const double res = max_hexagonality_residual(cx.dual(), cx.cfg().grid.nu, &w);
  r.metrics["max_relative_residual"] = res;
  r.metrics["tolerance"] = dual_tol(cx.dual());
  r.witness = Witness{w.u, w.v};
  r.passed = res < dual_tol(cx.dual());
}

void check_pfaff(Context& cx, CheckResult& r) {
  const PfaffReport p = pfaff_consistency(cx.dual(), cx.cfg().grid.nu);
  r.metrics["max_residual"] = p.max_residual;
  r.metrics["per_relation"] = p.per_relation;
  r.metrics["tolerance"] = kPfaffTol;
  r.witness = Witness{p.witness.u, p.witness.v};
  r.passed = p.max_residual < kPfaffTol;
}

void check_planarity(Context& cx, CheckResult& r) {
  const int n = cx.cfg().grid.nu;
  const PlaneFit fit = best_fit_plane(sample_dual_curve(cx.dual(), 0, n));
  const double q = plane_incidence_residual(fit.plane, sample_dual_curve(cx.dual(), 1, n));
  r.metrics["fit_residual"] = fit.residual;
  r.metrics["plane"] = Json::array({fit.plane.a, fit.plane.b, fit.plane.c, fit.plane.delta});
  r.metrics["second_foliation_incidence"] = q;
  r.metrics["tolerance"] = kPlanarityTol;
  r.passed = fit.residual < kPlanarityTol && q < kPlanarityTol;
}

void check_dual_blaschke(Context& cx, CheckResult& r) {
  ChartPoint w;
  const double kb = max_blaschke_curvature(to_web(cx.dual()), cx.cfg().grid.nu, cx.cfg().grid.nv, &w);
  r.metrics["max_abs_K_B"] = kb;
  r.metrics["tolerance"] = kBlaschkeTol;
  r.witness = Witness{w.u, w.v};
  r.passed = kb < kBlaschkeTol;
}

CheckResult run_one(Context& cx, Check c, std::optional<Json>* mu) {
  CheckResult r;
  r.check = c;
  const auto t0 = Clock::now();
  const bool dual = is_dual(cx.cfg().family);
  try {
    switch (c) {
      case Check::pde: dual ? check_dual_pde(cx, r) : check_pde(cx, r); break;
      case Check::integral: check_integral(cx, r, mu); break;
      case Check::blaschke: dual ? check_dual_blaschke(cx, r) : check_blaschke(cx, r); break;
      case Check::closure: check_closure(cx, r); break;
      case Check::curvature: check_curvature(cx, r); break;
      case Check::semih: check_semih(cx, r); break;
      case Check::hodograph: check_hodograph(cx, r); break;
      case Check::hexagonality: check_hexagonality(cx, r); break;
      case Check::pfaff: check_pfaff(cx, r); break;
      case Check::planarity: check_planarity(cx, r); break;
    }
  } catch (const Error& e) {
    r.passed = false;
    r.error = e.what();
    if (e.witness()) r.witness = *e.witness();
  } catch (const std::exception& e) {
    r.passed = false;
    r.error = e.what();
  }
  r.seconds = seconds_since(t0);
  return r;
}

std::optional<Web3Field> plot_web(Context& cx, const RunConfig& cfg) {
  if (is_dual(cfg.family)) return to_web(cx.dual());
  if (std::holds_alternative<FlatFamily>(cfg.family) || std::holds_alternative<ConstantCurvatureFamily>(cfg.family)) {
    return coordinate_web(cx.field().domain());
  }
  return cx.web();
}

void write_metric_samples(const std::filesystem::path& path, const MetricField& f, const Grid& g) {
  CsvWriter csv(path, {"u", "v", "E", "F", "G", "K_G"});
  for (const ChartPoint& p : f.domain().interior_grid(g.nu, g.nv)) {
    const MetricJet2 m = f.jet(p);
    csv.row({p.u, p.v, m.E, m.F, m.G, gaussian_curvature(m)});
  }
}

void write_leaves(const std::filesystem::path& dir, const Web3Field& web, const RunConfig& cfg,
                  std::vector<std::string>& outputs) {
  const auto leaves = sample_leaves(web, cfg.output.leaves_per_foliation, cfg.integrator);
  CsvWriter csv(dir / "leaves.csv", {"foliation", "leaf", "u", "v"});
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    for (const ChartPoint& p : leaves[i].points) {
      csv.row({static_cast<double>(leaves[i].foliation), static_cast<double>(i), p.u, p.v});
    }
  }
  outputs.push_back("leaves.csv");
  write_text(dir / "web.svg", emit_svg(leaves, web.domain()));
  outputs.push_back("web.svg");
}

void write_trajectories(const std::filesystem::path& path, Context& cx, const RunConfig& cfg) {
  const MetricField& f = cx.field();
  const CubicForm& I = cx.integral();
  const auto starts = sample_phase_points(f, cfg.verify.trajectories, cfg.seed);
  CsvWriter csv(path, {"trajectory", "t", "u", "v", "p", "q", "H", "I"});
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const Trajectory tr = integrate_geodesic(f, starts[k], cfg.verify.t_span, cfg.integrator);
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      const PhasePoint& x = tr.x[i];
      const double H = hamiltonian(f.jet({x.u, x.v}), x.p, x.q);
      csv.row({static_cast<double>(k), tr.t[i], x.u, x.v, x.p, x.q, H, cubic_gradient(I, x).value});
    }
  }
}

void write_dual_points(const std::filesystem::path& path, const SlopeTriple& t, int n) {
  CsvWriter csv(path, {"foliation", "A", "B", "C", "D", "quadric_residual"});
  for (int i = 0; i < 2; ++i) {
    for (const DualPoint& p : sample_dual_curve(t, i, n)) {
      const DualPoint q = normalized(p);
      csv.row({static_cast<double>(i), q.A, q.B, q.C, q.D, quadric_residual(p, t.eps)});
    }
  }
}

}  // namespace

BuiltFamily build_family(const FamilySpec& spec) {
  BuiltFamily b;
  struct V {
    BuiltFamily& b;
    void operator()(const FlatFamily& f) { b.metric = make_constant_curvature(CurvatureKind::flat).with_domain(f.domain); }
    void operator()(const TranslationFamilySpec& t) { b.metric = make_translation_family(t); }
    void operator()(const OdeFamilySpec& s) {
      b.metric = s.family == OdeFamilySpec::Family::spiral ? make_spiral_family(s) : make_dilation_family(s);
    }
    void operator()(const SimpleWaveFamily& w) {
      b.metric = make_simple_wave(simple_wave_from_metric(w.E, w.F, w.G, w.profile, w.half_width));
    }
    void operator()(const ConstantCurvatureFamily& c) { b.metric = make_constant_curvature(c.kind); }
    void operator()(const DualDim3Family& d) {
      b.dual = web_from_planes(d.eps, d.plane, d.domain);
      b.dual_metric = dual_metric_dim3(d.eps, d.domain);
    }
    void operator()(const DualDim2Family& d) {
      b.dual = dim2_web(d.rho, d.eps, d.P0, d.z0, d.domain);
      b.dual_metric = dual_metric_dim2(d.rho, d.eps, d.domain);
    }
  };
  std::visit(V{b}, spec);
  return b;
}

Json describe_family(const FamilySpec& spec, const BuiltFamily* built) {
  Json j = Json::object();
  j["kind"] = family_kind(spec);
  struct V {
    Json& j;
    void operator()(const FlatFamily& f) { j["domain"] = domain_json(f.domain); }
    void operator()(const TranslationFamilySpec& t) {
      j["h"] = profile_json(t.h);
      j["f0"] = t.f0;
      j["domain"] = domain_json(t.domain);
      j["signature"] = to_string(t.mode);
    }
    void operator()(const OdeFamilySpec& s) {
      j["kappa"] = s.kappa;
      j["e0"] = s.e0;
      j["j0"] = s.j0;
      j["f0"] = s.f0;
      j["s0"] = s.s0;
      j["domain"] = domain_json(s.domain);
      if (s.s_interval) j["s_interval"] = Json::array({s.s_interval->first, s.s_interval->second});
      if (s.family == OdeFamilySpec::Family::dilation) {
        j["constraint"] = to_string(s.constraint);
        j["degenerate"] = s.degenerate_branch;
      }
      j["signature"] = to_string(s.mode);
    }
    void operator()(const SimpleWaveFamily& w) {
      j["E"] = w.E;
      j["F"] = w.F;
      j["G"] = w.G;
      j["profile"] = profile_json(w.profile);
      j["half_width"] = w.half_width;
    }
    void operator()(const ConstantCurvatureFamily& c) {
      j["curvature"] = c.kind == CurvatureKind::flat ? "flat" : c.kind == CurvatureKind::sphere ? "sphere" : "hyperbolic";
    }
    void operator()(const DualDim3Family& d) {
      j["eps"] = d.eps;
      j["plane"] = Json::array({d.plane.a, d.plane.b, d.plane.c, d.plane.delta});
      j["orbit_invariant"] = orbit_invariant(d.plane);
      j["domain"] = domain_json(d.domain);
    }
    void operator()(const DualDim2Family& d) {
      j["rho"] = d.rho;
      j["eps"] = d.eps;
      j["P0"] = d.P0;
      j["z0"] = d.z0;
      j["domain"] = domain_json(d.domain);
      const auto c = constant_slope_web(d.rho, d.eps);
      j["constant_slope_web"] = c ? Json(*c) : Json(nullptr);
    }
  };
  std::visit(V{j}, spec);
  if (built && built->metric) {
    const MetricField& f = *built->metric;
    j["name"] = f.name();
    j["tag"] = to_string(f.family());
    j["chart"] = domain_json(f.domain());
    Json p = Json::object();
    for (const auto& [k, v] : f.parameters()) p[k] = v;
    j["derived"] = p;
  }
  return j;
}

std::vector<CheckResult> run_checks(const RunConfig& cfg, const BuiltFamily& family, std::optional<Json>* mu) {
  Context cx(cfg, family);
  std::vector<CheckResult> out;
  for (Check c : cfg.checks) out.push_back(run_one(cx, c, mu));
  return out;
}

bool VerificationReport::all_passed() const {
  if (!family_error.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

Json VerificationReport::to_json() const {
  Json j = Json::object();
  j["schema_version"] = kSchemaVersion;
  j["command"] = to_string(command);
  j["family"] = family;
  if (!family_error.empty()) j["family_error"] = family_error;
  j["settings"] = settings;
  if (mu_decision) j["mu_decision"] = *mu_decision;
  Json cs = Json::array();
  for (const CheckResult& c : checks) {
    Json e = Json::object();
    e["name"] = to_string(c.check);
    e["status"] = c.passed ? "pass" : "fail";
    for (auto it = c.metrics.begin(); it != c.metrics.end(); ++it) e[it.key()] = it.value();
    if (!c.error.empty()) e["error"] = c.error;
    if (c.witness && !c.passed) e["witness"] = witness_json(*c.witness);
    cs.push_back(e);
  }
  j["checks"] = cs;
  j["outputs"] = outputs;
  j["passed"] = all_passed();
  return j;
}

Json VerificationReport::timing_json() const {
  Json j = Json::object();
  j["schema_version"] = kSchemaVersion;
  Json cs = Json::object();
  for (const CheckResult& c : checks) cs[to_string(c.check)] = c.seconds;
  j["checks_seconds"] = cs;
  j["total_seconds"] = seconds;
  return j;
}

VerificationReport run_pipeline(const RunConfig& cfg_in) {
  const auto t0 = Clock::now();
  RunConfig cfg = cfg_in;
  resolve_checks(cfg);
  const bool dual = is_dual(cfg.family);
  if (cfg.command == Command::dual && !dual) {
    throw Error(ErrorKind::ValidationError, "command: dual needs a dual_dim3 or dual_dim2 family");
  }
  if (cfg.command == Command::trace && (dual || std::holds_alternative<ConstantCurvatureFamily>(cfg.family))) {
    throw Error(ErrorKind::ValidationError, "command: trace needs a family with a cubic integral");
  }

  VerificationReport rep;
  rep.command = cfg.command;
  {
    Json s = Json::object();
    s["seed"] = cfg.seed;
    s["grid"] = Json::array({cfg.grid.nu, cfg.grid.nv});
    Json integ = Json::object();
    integ["rel_tol"] = cfg.integrator.rel_tol;
    integ["abs_tol"] = cfg.integrator.abs_tol;
    integ["max_step"] = cfg.integrator.max_step;
    s["integrator"] = integ;
    s["trajectories"] = cfg.verify.trajectories;
    s["t_span"] = cfg.verify.t_span;
    s["hexagon_eps"] = cfg.verify.hexagon_eps;
    rep.settings = s;
  }

  std::filesystem::path dir = cfg.output.dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());

  BuiltFamily fam;
  try {
    fam = build_family(cfg.family);
  } catch (const Error& e) {
    rep.family_error = e.what();
    rep.family_witness = e.witness();
  }
  rep.family = describe_family(cfg.family, rep.family_error.empty() ? &fam : nullptr);

  // Which checks this command runs.
  std::vector<Check> enabled;
  switch (cfg.command) {
    case Command::verify:
    case Command::dual: enabled = cfg.checks; break;
    case Command::trace:
      if (std::find(cfg.checks.begin(), cfg.checks.end(), Check::integral) != cfg.checks.end()) {
        enabled = {Check::integral};
      }
      break;
    case Command::generate:
    case Command::plot: break;
  }

  if (!rep.family_error.empty()) {
    for (Check c : enabled) {
      CheckResult r;
      r.check = c;
      r.error = rep.family_error;
      r.witness = rep.family_witness;
      rep.checks.push_back(r);
    }
  } else {
    RunConfig run = cfg;
    run.checks = enabled;
    Context cx(run, fam);
    for (Check c : enabled) rep.checks.push_back(run_one(cx, c, &rep.mu_decision));

    auto guarded = [&](const char* what, auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError) throw;
        rep.family_error = std::string(what) + ": " + e.what();
      }
    };
    const MetricField& sampled = dual ? *fam.dual_metric : *fam.metric;
    switch (cfg.command) {
      case Command::generate:
      case Command::verify:
        write_metric_samples(dir / "metric.csv", sampled, cfg.grid);
        rep.outputs.push_back("metric.csv");
        if (cfg.command == Command::verify && cfg.output.plot) {
          guarded("plot", [&] {
            if (auto w = plot_web(cx, cfg)) write_leaves(dir, *w, cfg, rep.outputs);
          });
        }
        break;
      case Command::trace:
        guarded("trace", [&] {
          write_trajectories(dir / "trajectories.csv", cx, cfg);
          rep.outputs.push_back("trajectories.csv");
        });
        break;
      case Command::plot:
        guarded("plot", [&] {
          if (auto w = plot_web(cx, cfg)) write_leaves(dir, *w, cfg, rep.outputs);
        });
        break;
      case Command::dual:
        write_dual_points(dir / "duals.csv", *fam.dual, cfg.grid.nu);
        rep.outputs.push_back("duals.csv");
        if (const auto* d3 = std::get_if<DualDim3Family>(&cfg.family)) {
          write_text(dir / "dual.svg", emit_dual_svg(build_dual_scene(*fam.dual, d3->plane)));
          rep.outputs.push_back("dual.svg");
        }
        guarded("plot", [&] { write_leaves(dir, to_web(*fam.dual), cfg, rep.outputs); });
        break;
    }
  }

  rep.outputs.push_back(cfg.output.report);
  rep.outputs.push_back(cfg.output.timing);
  write_json(dir / cfg.output.report, rep.to_json());
  rep.seconds = seconds_since(t0);
  write_json(dir / cfg.output.timing, rep.timing_json());
  return rep;
}

int exit_code(const VerificationReport& report) { return report.all_passed() ? 0 : 1; }

}  // namespace hexweb::io
