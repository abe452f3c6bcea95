// Command-line front end: hexweb generate|verify|trace|dual|plot --config <path>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hexweb/errors.hpp"
#include "hexweb/io/config.hpp"
#include "hexweb/io/pipeline.hpp"

namespace {

constexpr int kUsageError = 2;

std::vector<std::string> split_checks(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hexagonal geodesic 3-webs: construct metrics and certify their webs"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir, checks;
  std::uint64_t seed = 0;
  bool quiet = false;
  std::vector<CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"generate", "build the family and write metric samples"},
      {"verify", "run the configured checks and write a report"},
      {"trace", "integrate geodesics and check the cubic integral along them"},
      {"dual", "write dual-space points and pictures for a dual family"},
      {"plot", "write the leaves of the web as CSV and SVG"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "TOML run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "random seed (overrides seed)");
    sub->add_option("--checks", checks, "comma-separated checks to run (overrides checks)");
    sub->add_flag("-q,--quiet", quiet, "only report failures");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  try {
    hexweb::io::RunConfig cfg = hexweb::io::load_config(config_path);
    cfg.command = *hexweb::io::parse_command(chosen->get_name());
    if (chosen->count("--out")) cfg.output.dir = out_dir;
    if (chosen->count("--seed")) cfg.seed = seed;
    if (chosen->count("--checks")) hexweb::io::set_checks(cfg, split_checks(checks));

    const hexweb::io::VerificationReport rep = hexweb::io::run_pipeline(cfg);
    if (!rep.family_error.empty()) std::cerr << "family: " << rep.family_error << "\n";
    for (const auto& c : rep.checks) {
      if (quiet && c.passed) continue;
      std::cout << (c.passed ? "PASS " : "FAIL ") << hexweb::io::to_string(c.check);
      if (!c.error.empty()) std::cout << "  (" << c.error << ")";
      if (c.witness && !c.passed) std::cout << "  at u=" << c.witness->u << " v=" << c.witness->v;
      std::cout << "\n";
    }
    if (!quiet) std::cout << "report: " << (cfg.output.dir / cfg.output.report).string() << "\n";
    return hexweb::io::exit_code(rep);
  } catch (const hexweb::Error& e) {
    std::cerr << "hexweb: " << e.what() << "\n";
    return kUsageError;
  }
}
