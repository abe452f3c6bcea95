#include "hexweb/io/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "hexweb/errors.hpp"

namespace hexweb::io {

namespace {

struct CommandName {
  Command c;
  const char* name;
};
constexpr CommandName kCommands[] = {{Command::generate, "generate"},
                                     {Command::verify, "verify"},
                                     {Command::trace, "trace"},
                                     {Command::dual, "dual"},
                                     {Command::plot, "plot"}};

struct CheckName {
  Check c;
  const char* name;
};
constexpr CheckName kChecks[] = {{Check::pde, "pde"},
                                 {Check::integral, "integral"},
                                 {Check::blaschke, "blaschke"},
                                 {Check::closure, "closure"},
                                 {Check::curvature, "curvature"},
                                 {Check::semih, "semih"},
                                 {Check::hodograph, "hodograph"},
                                 {Check::hexagonality, "hexagonality"},
                                 {Check::pfaff, "pfaff"},
                                 {Check::planarity, "planarity"}};

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::ValidationError, field + ": " + why);
}

// A table view that remembers which keys were read so the rest can be
// rejected as unknown.
class Section {
 public:
  Section(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

  std::string field(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  bool has(std::string_view key) const { return t_.contains(key); }

  const toml::node* node(std::string_view key) {
    used_.insert(std::string(key));
    return t_.get(key);
  }

  double number(std::string_view key, double fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    if (auto v = n->value_exact<double>()) return *v;
    if (auto v = n->value_exact<int64_t>()) return static_cast<double>(*v);
    invalid(field(key), "expected a number");
  }

  int integer(std::string_view key, int fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    if (auto v = n->value_exact<int64_t>()) {
      if (*v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) invalid(field(key), "out of range");
      return static_cast<int>(*v);
    }
    invalid(field(key), "expected an integer");
  }

  bool boolean(std::string_view key, bool fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    if (auto v = n->value_exact<bool>()) return *v;
    invalid(field(key), "expected a boolean");
  }

  std::string string(std::string_view key, const std::string& fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    if (auto v = n->value_exact<std::string>()) return *v;
    invalid(field(key), "expected a string");
  }

  std::vector<double> numbers(std::string_view key) {
    const toml::node* n = node(key);
    std::vector<double> out;
    if (!n) return out;
    const toml::array* a = n->as_array();
    if (!a) invalid(field(key), "expected an array of numbers");
    for (const toml::node& e : *a) {
      if (auto v = e.value_exact<double>()) {
        out.push_back(*v);
      } else if (auto w = e.value_exact<int64_t>()) {
        out.push_back(static_cast<double>(*w));
      } else {
        invalid(field(key), "expected an array of numbers");
      }
    }
    return out;
  }

  std::optional<Section> table(std::string_view key) {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    const toml::table* t = n->as_table();
    if (!t) invalid(field(key), "expected a table");
    return Section(*t, field(key));
  }

  Domain domain(std::string_view key, const Domain& fallback) {
    if (!has(key)) {
      node(key);
      return fallback;
    }
    const std::vector<double> d = numbers(key);
    if (d.size() != 4) invalid(field(key), "expected [u0, u1, v0, v1]");
    if (!(d[0] < d[1]) || !(d[2] < d[3])) invalid(field(key), "empty rectangle");
    return Domain{d[0], d[1], d[2], d[3]};
  }

  int sign(std::string_view key, int fallback) {
    const int e = integer(key, fallback);
    if (e != 1 && e != -1) invalid(field(key), "must be 1 or -1");
    return e;
  }

  void finish() const {
    for (const auto& [k, v] : t_) {
      if (!used_.count(std::string(k.str()))) invalid(field(k.str()), "unknown key");
    }
  }

 private:
  const toml::table& t_;
  std::string path_;
  std::set<std::string> used_;
};

SignatureMode read_signature(Section& s) {
  const std::string m = s.string("signature", "riemannian");
  if (m == "riemannian") return SignatureMode::riemannian;
  if (m == "pseudo") return SignatureMode::pseudo;
  invalid(s.field("signature"), "expected \"riemannian\" or \"pseudo\"");
}

Profile read_profile(Section& parent, std::string_view key, const Profile& fallback) {
  auto t = parent.table(key);
  if (!t) return fallback;
  const std::string kind = t->string("kind", "");
  const std::vector<double> p = t->numbers("params");
  t->finish();
  auto need = [&](std::size_t n) {
    if (p.size() != n) invalid(t->field("params"), "expected " + std::to_string(n) + " values for " + kind);
  };
  if (kind == "constant") {
    need(1);
    return Profile(Profile::Kind::constant, p);
  }
  if (kind == "trig") {
    need(4);
    return Profile(Profile::Kind::trig, p);
  }
  if (kind == "exp") {
    need(3);
    return Profile(Profile::Kind::exp, p);
  }
  if (kind == "poly") {
    if (p.empty()) invalid(t->field("params"), "expected at least one coefficient");
    return Profile(Profile::Kind::poly, p);
  }
  invalid(t->field("kind"), "expected constant, poly, trig or exp");
}

FamilySpec read_ode_family(Section& s, OdeFamilySpec::Family which) {
  OdeFamilySpec spec;
  spec.family = which;
  spec.kappa = s.number("kappa", spec.kappa);
  spec.e0 = s.number("e0", spec.e0);
  spec.j0 = s.number("j0", spec.j0);
  spec.f0 = s.number("f0", spec.f0);
  spec.s0 = s.number("s0", spec.s0);
  spec.domain = s.domain("domain", which == OdeFamilySpec::Family::dilation ? Domain{1.0, 2.0, 0.6, 1.0} : spec.domain);
  spec.node_spacing = s.number("node_spacing", spec.node_spacing);
  if (!(spec.node_spacing > 0.0)) invalid(s.field("node_spacing"), "must be positive");
  if (s.has("s_interval")) {
    const std::vector<double> iv = s.numbers("s_interval");
    if (iv.size() != 2 || !(iv[0] < iv[1])) invalid(s.field("s_interval"), "expected [lo, hi] with lo < hi");
    spec.s_interval = std::make_pair(iv[0], iv[1]);
  } else {
    s.node("s_interval");
  }
  spec.mode = read_signature(s);
  if (which == OdeFamilySpec::Family::dilation) {
    const std::string c = s.string("constraint", "none");
    if (c == "none") {
      spec.constraint = OdeFamilySpec::Constraint::none;
    } else if (c == "a") {
      spec.constraint = OdeFamilySpec::Constraint::a;
    } else if (c == "b") {
      spec.constraint = OdeFamilySpec::Constraint::b;
    } else if (c == "c") {
      spec.constraint = OdeFamilySpec::Constraint::c;
    } else {
      invalid(s.field("constraint"), "expected none, a, b or c");
    }
    spec.degenerate_branch = s.boolean("degenerate", false);
    if (spec.degenerate_branch && spec.constraint != OdeFamilySpec::Constraint::none) {
      invalid(s.field("degenerate"), "cannot be combined with a constraint");
    }
  }
  return spec;
}

FamilySpec read_family(Section& root) {
  if (!root.has("family")) invalid("family", "missing family section");
  Section fam = *root.table("family");
  std::vector<std::string> kinds;
  {
    const toml::node* n = root.node("family");
    for (const auto& [k, v] : *n->as_table()) kinds.emplace_back(k.str());
  }
  if (kinds.size() != 1) invalid("family", "exactly one family section is required, found " + std::to_string(kinds.size()));
  const std::string kind = kinds.front();
  auto sub = fam.table(kind);
  if (!sub) invalid("family." + kind, "expected a table");
  Section& s = *sub;
  FamilySpec out;
  if (kind == "flat") {
    FlatFamily f;
    f.domain = s.domain("domain", f.domain);
    out = f;
  } else if (kind == "translation") {
    TranslationFamilySpec t;
    t.h = read_profile(s, "h", t.h);
    t.f0 = s.number("f0", t.f0);
    t.domain = s.domain("domain", t.domain);
    t.mode = read_signature(s);
    out = t;
  } else if (kind == "spiral") {
    out = read_ode_family(s, OdeFamilySpec::Family::spiral);
  } else if (kind == "dilation") {
    out = read_ode_family(s, OdeFamilySpec::Family::dilation);
  } else if (kind == "simple_wave") {
    SimpleWaveFamily w;
    w.E = s.number("E", w.E);
    w.F = s.number("F", w.F);
    w.G = s.number("G", w.G);
    w.profile = read_profile(s, "profile", w.profile);
    w.half_width = s.number("half_width", w.half_width);
    if (!(w.half_width > 0.0)) invalid(s.field("half_width"), "must be positive");
    out = w;
  } else if (kind == "constant_curvature") {
    ConstantCurvatureFamily c;
    const std::string k = s.string("kind", "sphere");
    if (k == "flat") {
      c.kind = CurvatureKind::flat;
    } else if (k == "sphere") {
      c.kind = CurvatureKind::sphere;
    } else if (k == "hyperbolic") {
      c.kind = CurvatureKind::hyperbolic;
    } else {
      invalid(s.field("kind"), "expected flat, sphere or hyperbolic");
    }
    out = c;
  } else if (kind == "dual_dim3") {
    DualDim3Family d;
    d.eps = s.sign("eps", d.eps);
    if (s.has("plane")) {
      const std::vector<double> p = s.numbers("plane");
      if (p.size() != 4) invalid(s.field("plane"), "expected [a, b, c, delta]");
      d.plane = {p[0], p[1], p[2], p[3]};
    } else {
      s.node("plane");
    }
    d.domain = s.domain("domain", d.domain);
    out = d;
  } else if (kind == "dual_dim2") {
    DualDim2Family d;
    d.rho = s.number("rho", d.rho);
    d.eps = s.sign("eps", d.eps);
    d.P0 = s.number("P0", d.P0);
    d.z0 = s.number("z0", d.z0);
    d.domain = s.domain("domain", d.domain);
    out = d;
  } else {
    invalid("family." + kind, "unknown family");
  }
  s.finish();
  fam.finish();
  return out;
}

}  // namespace

const char* to_string(Command c) {
  for (const auto& e : kCommands) {
    if (e.c == c) return e.name;
  }
  return "unknown";
}

const char* to_string(Check c) {
  for (const auto& e : kChecks) {
    if (e.c == c) return e.name;
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view s) {
  for (const auto& e : kCommands) {
    if (s == e.name) return e.c;
  }
  return std::nullopt;
}

std::optional<Check> parse_check(std::string_view s) {
  for (const auto& e : kChecks) {
    if (s == e.name) return e.c;
  }
  return std::nullopt;
}

std::string family_kind(const FamilySpec& f) {
  struct V {
    std::string operator()(const FlatFamily&) const { return "flat"; }
    std::string operator()(const TranslationFamilySpec&) const { return "translation"; }
    std::string operator()(const OdeFamilySpec& s) const {
      return s.family == OdeFamilySpec::Family::spiral ? "spiral" : "dilation";
    }
    std::string operator()(const SimpleWaveFamily&) const { return "simple_wave"; }
    std::string operator()(const ConstantCurvatureFamily&) const { return "constant_curvature"; }
    std::string operator()(const DualDim3Family&) const { return "dual_dim3"; }
    std::string operator()(const DualDim2Family&) const { return "dual_dim2"; }
  };
  return std::visit(V{}, f);
}

bool is_dual(const FamilySpec& f) {
  return std::holds_alternative<DualDim3Family>(f) || std::holds_alternative<DualDim2Family>(f);
}

std::vector<Check> applicable_checks(const FamilySpec& f) {
  using C = Check;
  if (std::holds_alternative<DualDim3Family>(f)) return {C::pde, C::hexagonality, C::pfaff, C::planarity, C::blaschke};
  if (std::holds_alternative<DualDim2Family>(f)) return {C::pde, C::hexagonality, C::blaschke};
  if (std::holds_alternative<ConstantCurvatureFamily>(f)) return {C::curvature};
  if (std::holds_alternative<FlatFamily>(f)) return {C::pde, C::integral, C::blaschke, C::closure, C::curvature};
  if (std::holds_alternative<SimpleWaveFamily>(f)) {
    return {C::pde, C::integral, C::blaschke, C::closure, C::curvature, C::hodograph};
  }
  // The semi-Hamiltonian diagnostic needs Riemann invariants that chart the
  // domain; metrics depending on one combination of u and v have a
  // one-dimensional hodograph.
  if (const auto* s = std::get_if<OdeFamilySpec>(&f)) {
    const bool one_dim = s->family == OdeFamilySpec::Family::dilation && (s->degenerate_branch || s->kappa == 0.0);
    if (!one_dim) return {C::pde, C::integral, C::blaschke, C::closure, C::curvature, C::semih};
  }
  return {C::pde, C::integral, C::blaschke, C::closure, C::curvature};
}

void set_checks(RunConfig& cfg, const std::vector<std::string>& names) {
  const std::vector<Check> ok = applicable_checks(cfg.family);
  std::vector<Check> out;
  for (const std::string& n : names) {
    const auto c = parse_check(n);
    if (!c) invalid("checks", "unknown check \"" + n + "\"");
    if (std::find(ok.begin(), ok.end(), *c) == ok.end()) {
      invalid("checks", "check \"" + n + "\" does not apply to family " + family_kind(cfg.family));
    }
    if (std::find(out.begin(), out.end(), *c) != out.end()) invalid("checks", "duplicate check \"" + n + "\"");
    out.push_back(*c);
  }
  // Report order follows the applicable list, not the order given.
  std::vector<Check> ordered;
  for (Check c : ok) {
    if (std::find(out.begin(), out.end(), c) != out.end()) ordered.push_back(c);
  }
  cfg.checks = ordered;
}

void resolve_checks(RunConfig& cfg) {
  if (cfg.checks.empty()) cfg.checks = applicable_checks(cfg.family);
}

RunConfig parse_config(std::string_view text, std::string_view source) {
  toml::table tbl;
  try {
    tbl = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    const auto& b = e.source().begin;
    os << source << ":" << b.line << ":" << b.column << ": " << e.description();
    throw Error(ErrorKind::ParseError, os.str());
  }

  RunConfig cfg;
  Section root(tbl, "");
  if (root.has("command")) {
    const std::string c = root.string("command", "");
    const auto cmd = parse_command(c);
    if (!cmd) invalid("command", "expected generate, verify, trace, dual or plot");
    cfg.command = *cmd;
  }
  {
    const int64_t seed = root.has("seed") ? root.node("seed")->value_exact<int64_t>().value_or(-1) : 1;
    if (seed < 0) invalid("seed", "expected a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  cfg.family = read_family(root);

  if (auto g = root.table("grid")) {
    cfg.grid.nu = g->integer("nu", cfg.grid.nu);
    cfg.grid.nv = g->integer("nv", cfg.grid.nv);
    g->finish();
    if (cfg.grid.nu < 2 || cfg.grid.nv < 2) invalid("grid", "sizes must be at least 2");
  }
  if (auto t = root.table("integrator")) {
    cfg.integrator.rel_tol = t->number("rel_tol", cfg.integrator.rel_tol);
    cfg.integrator.abs_tol = t->number("abs_tol", cfg.integrator.abs_tol);
    cfg.integrator.max_step = t->number("max_step", cfg.integrator.max_step);
    t->finish();
    if (!(cfg.integrator.rel_tol > 0.0)) invalid("integrator.rel_tol", "must be positive");
    if (!(cfg.integrator.abs_tol > 0.0)) invalid("integrator.abs_tol", "must be positive");
    if (!(cfg.integrator.max_step > 0.0)) invalid("integrator.max_step", "must be positive");
  }
  if (auto v = root.table("verify")) {
    cfg.verify.trajectories = v->integer("trajectories", cfg.verify.trajectories);
    cfg.verify.t_span = v->number("t_span", cfg.verify.t_span);
    cfg.verify.hexagon_eps = v->number("hexagon_eps", cfg.verify.hexagon_eps);
    cfg.verify.probe_points = v->integer("probe_points", cfg.verify.probe_points);
    cfg.verify.control_amplitude = v->number("control_amplitude", cfg.verify.control_amplitude);
    v->finish();
    if (cfg.verify.trajectories < 1) invalid("verify.trajectories", "must be at least 1");
    if (!(cfg.verify.t_span > 0.0)) invalid("verify.t_span", "must be positive");
    if (!(cfg.verify.hexagon_eps > 0.0)) invalid("verify.hexagon_eps", "must be positive");
    if (cfg.verify.probe_points < 1) invalid("verify.probe_points", "must be at least 1");
  }
  if (auto o = root.table("output")) {
    cfg.output.dir = o->string("dir", cfg.output.dir.string());
    cfg.output.report = o->string("report", cfg.output.report);
    cfg.output.timing = o->string("timing", cfg.output.timing);
    cfg.output.plot = o->boolean("plot", cfg.output.plot);
    cfg.output.leaves_per_foliation = o->integer("leaves_per_foliation", cfg.output.leaves_per_foliation);
    o->finish();
    if (cfg.output.report.empty()) invalid("output.report", "must not be empty");
    if (cfg.output.leaves_per_foliation < 0) invalid("output.leaves_per_foliation", "must be non-negative");
  }
  if (root.has("checks")) {
    const toml::node* n = root.node("checks");
    const toml::array* a = n->as_array();
    if (!a) invalid("checks", "expected an array of strings");
    std::vector<std::string> names;
    for (const toml::node& e : *a) {
      auto s = e.value_exact<std::string>();
      if (!s) invalid("checks", "expected an array of strings");
      names.push_back(*s);
    }
    if (names.empty()) invalid("checks", "must not be empty");
    set_checks(cfg, names);
  }
  root.finish();
  resolve_checks(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace hexweb::io
