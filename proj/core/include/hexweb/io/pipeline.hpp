#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hexweb/duality.hpp"
#include "hexweb/errors.hpp"
#include "hexweb/io/config.hpp"
#include "hexweb/io/json_writer.hpp"

namespace hexweb::io {

struct CheckResult {
  Check check = Check::pde;
  bool passed = false;
  Json metrics = Json::object();  // check-specific values, in a fixed order
  std::optional<Witness> witness;
  std::string error;              // set when a module error ended the check
  double seconds = 0.0;           // kept out of the report
};

struct VerificationReport {
  Command command = Command::verify;
  Json family = Json::object();
  Json settings = Json::object();
  std::optional<Json> mu_decision;
  std::vector<CheckResult> checks;
  std::vector<std::string> outputs;  // file names written, relative to the output directory
  std::string family_error;
  std::optional<Witness> family_witness;
  double seconds = 0.0;

  bool all_passed() const;
  // Deterministic under a fixed config and seed; contains no timing.
  Json to_json() const;
  Json timing_json() const;
};

// A constructed family: a metric in web-adapted coordinates, or a slope
// triple in the dual (z, y) chart together with its dual metric.
struct BuiltFamily {
  std::optional<MetricField> metric;
  std::optional<SlopeTriple> dual;
  std::optional<MetricField> dual_metric;
};

BuiltFamily build_family(const FamilySpec& spec);
Json describe_family(const FamilySpec& spec, const BuiltFamily* built = nullptr);

// Runs cfg.checks against an already built family.
std::vector<CheckResult> run_checks(const RunConfig& cfg, const BuiltFamily& family, std::optional<Json>* mu = nullptr);

// Builds the family, runs the command and writes its files into
// cfg.output.dir.  Module errors become failed checks; IoError and
// ValidationError propagate.
VerificationReport run_pipeline(const RunConfig& cfg);

// 0 iff the family was built and every enabled check passed.
int exit_code(const VerificationReport& report);

}  // namespace hexweb::io
