// Config-driven experiment runner. Subcommands select the experiment; the
// JSON config carries instance, method, params, seed, and output_dir, with
// --seed / --output-dir / --threads overriding. Exit codes: 0 success
// (numerical divergence is recorded in summary.json), 1 contract violation,
// 2 usage or config error.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "logz/experiments.hpp"
#include "logz/io.hpp"

namespace {

int thread_count_fallback() {
  if (const char* env = std::getenv("LOGZ_LAB_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logz-lab: sampling, normalizing-constant, and quantum-walk spectral experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  long long seed = -1;
  int threads = 0;

  const struct {
    const char* name;
    const char* experiment;
    const char* help;
  } subs[] = {
      {"sample", "sample", "run a sampling chain and dump the trajectory"},
      {"estimate-z", "estimate_z", "annealing + telescoping normalizing-constant estimate"},
      {"spectrum", "spectrum", "discretize a chain and verify its quantum-walk spectrum"},
      {"mlmc", "mlmc", "multilevel Monte Carlo estimate with level statistics"},
      {"hard-instance", "hard_instance", "build a lower-bound hard instance and certify it"},
      {"ledger-report", "ledger_report", "predicted complexities beside measured counts"},
  };
  for (const auto& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("--config", config_path, "JSON experiment config")->required();
    sc->add_option("--seed", seed, "override the config seed");
    sc->add_option("--output-dir", output_dir, "override the config output_dir");
    sc->add_option("--threads", threads, "worker cap (env LOGZ_LAB_THREADS as fallback)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::string experiment;
  for (const auto& s : subs)
    if (app.get_subcommand(s.name)->parsed()) experiment = s.experiment;

  nlohmann::json doc;
  try {
    doc = logz::read_json_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (!doc.contains("experiment")) doc["experiment"] = experiment;
  if (doc.at("experiment") != experiment) {
    std::cerr << "config error: field 'experiment' (" << doc.at("experiment")
              << ") does not match subcommand '" << experiment << "'\n";
    return 2;
  }

  std::string bad_field;
  auto cfg = logz::parse_experiment_config(doc, &bad_field);
  if (!cfg) {
    std::cerr << "config error: missing or invalid field '" << bad_field << "'\n";
    return 2;
  }
  if (seed >= 0) cfg->seed = static_cast<std::uint64_t>(seed);
  if (!output_dir.empty()) cfg->output_dir = output_dir;
  cfg->threads = threads > 0 ? threads : (cfg->threads > 1 ? cfg->threads : thread_count_fallback());

  try {
    return logz::run_experiment(*cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
