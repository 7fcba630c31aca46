#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lcs/runner.hpp"

namespace {

struct CliOptions {
  std::string configPath;
  std::string outPath;
  bool text = false;
  std::optional<long> magnusCap, classCap, tensorMax, normIndexMax, exteriorSizeLimit, degreeCap, phiPowerCap,
      witnessMax;
};

void addCapOptions(CLI::App* app, CliOptions& opts) {
  app->add_option("--config", opts.configPath, "JSON run configuration");
  app->add_option("--out", opts.outPath, "write the JSON report to this path (default: stdout)");
  app->add_flag("--text", opts.text, "also print a plain-text rendering to stderr");
  app->add_option("--magnus-cap", opts.magnusCap, "truncation degree for series expansions");
  app->add_option("--max-class", opts.classCap, "engine class cap c (gamma_n computed for n <= c)");
  app->add_option("--max-tensor", opts.tensorMax, "largest tensor exponent checked");
  app->add_option("--max-norm-index", opts.normIndexMax, "norm sequence length");
  app->add_option("--max-exterior-size", opts.exteriorSizeLimit, "largest allowed compound dimension");
  app->add_option("--max-degree-cap", opts.degreeCap, "degree bound for the unit-sublattice factor search");
  app->add_option("--max-phi-power", opts.phiPowerCap, "memoization cap for powers of phi");
  app->add_option("--max-witness", opts.witnessMax, "largest witness index k");
}

lcs::RunConfig buildConfig(const CliOptions& opts, const std::vector<std::string>& sections) {
  lcs::RunConfig cfg;
  if (!opts.configPath.empty()) {
    std::ifstream in(opts.configPath);
    if (!in) throw std::invalid_argument("config: cannot open '" + opts.configPath + "'");
    lcs::json j;
    try {
      in >> j;
    } catch (const lcs::json::parse_error& e) {
      throw std::invalid_argument("config: " + std::string(e.what()));
    }
    cfg = lcs::parseConfig(j);
  }
  lcs::applyEnvOverrides(cfg.caps);
  if (opts.magnusCap) cfg.caps.magnusCap = static_cast<int>(*opts.magnusCap);
  if (opts.classCap) cfg.caps.classCap = static_cast<int>(*opts.classCap);
  if (opts.tensorMax) cfg.caps.tensorMax = static_cast<int>(*opts.tensorMax);
  if (opts.normIndexMax) cfg.caps.normIndexMax = static_cast<int>(*opts.normIndexMax);
  if (opts.exteriorSizeLimit) cfg.caps.exteriorSizeLimit = *opts.exteriorSizeLimit;
  if (opts.degreeCap) cfg.caps.degreeCap = static_cast<int>(*opts.degreeCap);
  if (opts.phiPowerCap) cfg.caps.phiPowerCap = static_cast<int>(*opts.phiPowerCap);
  if (opts.witnessMax) cfg.caps.witnessMax = static_cast<int>(*opts.witnessMax);
  if (!sections.empty()) cfg.sections = sections;
  return cfg;
}

int runAndEmit(const CliOptions& opts, const std::vector<std::string>& sections) {
  lcs::RunConfig cfg = buildConfig(opts, sections);
  lcs::Report report = lcs::run(cfg);
  std::string payload = lcs::toJson(report, true).dump(2) + "\n";
  if (!opts.outPath.empty()) {
    std::ofstream out(opts.outPath);
    if (!out) throw std::invalid_argument("config: cannot write '" + opts.outPath + "'");
    out << payload;
  } else {
    std::cout << payload;
  }
  if (opts.text) std::cerr << lcs::renderText(report);
  return lcs::exitCode(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-level verification suite for lower central series of free-by-cyclic groups"};
  app.require_subcommand(1);

  CliOptions opts;
  std::vector<std::pair<CLI::App*, std::vector<std::string>>> routes;

  CLI::App* report = app.add_subcommand("report", "run every section");
  addCapOptions(report, opts);
  routes.emplace_back(report, std::vector<std::string>{});

  for (const std::string& name : lcs::allSections()) {
    CLI::App* sub = app.add_subcommand(name, "run only the " + name + " section");
    addCapOptions(sub, opts);
    routes.emplace_back(sub, std::vector<std::string>{name});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    for (auto& [sub, sections] : routes)
      if (sub->parsed()) return runAndEmit(opts, sections);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
