#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hexweb/duality.hpp"
#include "hexweb/generators.hpp"
#include "hexweb/ode.hpp"

namespace hexweb::io {

enum class Command { generate, verify, trace, dual, plot };

enum class Check { pde, integral, blaschke, closure, curvature, semih, hodograph, hexagonality, pfaff, planarity };

const char* to_string(Command c);
const char* to_string(Check c);
std::optional<Command> parse_command(std::string_view s);
std::optional<Check> parse_check(std::string_view s);

struct FlatFamily {
  Domain domain{-1.0, 1.0, -1.0, 1.0};
};

struct ConstantCurvatureFamily {
  CurvatureKind kind = CurvatureKind::sphere;
};

struct SimpleWaveFamily {
  double E = 1.0, F = 0.3, G = 1.2;  // constant metric the wave passes through
  Profile profile = Profile::linear(0.0, 20.0);
  double half_width = 0.2;
};

struct DualDim3Family {
  int eps = 1;
  PlaneSection plane{0.0, 0.0, 1.0, 1.0};
  Domain domain{1.0, 2.0, 0.25, 1.25};
};

struct DualDim2Family {
  double rho = 2.0;
  int eps = -1;
  double P0 = 0.5, z0 = 1.0;
  Domain domain{1.0, 2.0, 0.0, 1.0};
};

using FamilySpec = std::variant<FlatFamily, TranslationFamilySpec, OdeFamilySpec, SimpleWaveFamily,
                                ConstantCurvatureFamily, DualDim3Family, DualDim2Family>;

// Table name of the family inside [family.*].
std::string family_kind(const FamilySpec& f);
bool is_dual(const FamilySpec& f);

// Checks meaningful for a family, in report order.
std::vector<Check> applicable_checks(const FamilySpec& f);

struct Grid {
  int nu = 20, nv = 20;
};

struct VerifySettings {
  int trajectories = 100;
  double t_span = 1.0;
  double hexagon_eps = 0.1;
  int probe_points = 10;     // positions for the semi-Hamiltonian diagnostic
  double control_amplitude = 0.5;
};

struct OutputSettings {
  std::filesystem::path dir = "out";
  std::string report = "report.json";
  std::string timing = "timing.json";
  bool plot = false;
  int leaves_per_foliation = 9;
};

struct RunConfig {
  Command command = Command::verify;
  FamilySpec family = FlatFamily{};
  std::vector<Check> checks;  // empty until resolved: all applicable checks
  Grid grid;
  IntegratorConfig integrator{};
  VerifySettings verify;
  OutputSettings output;
  std::uint64_t seed = 1;
};

// Strict TOML parsing: unknown keys are rejected.  Throws ParseError (with
// line and column) or ValidationError naming the offending field.
RunConfig parse_config(std::string_view text, std::string_view source = "config");
RunConfig load_config(const std::filesystem::path& path);

// Replaces the check list; names must be known and applicable.
void set_checks(RunConfig& cfg, const std::vector<std::string>& names);
// Fills an empty check list with the applicable checks.
void resolve_checks(RunConfig& cfg);

}  // namespace hexweb::io
