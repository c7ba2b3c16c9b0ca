// lab: run seeded experiments and write CSVs plus a manifest.
//
//   lab <subcommand> --config <path> [--out <dir>] [--seed <u64>]
//
// Exit codes: 0 all checks passed, 2 configuration error, 3 invariant
// violation, 4 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ebmlab/error.hpp"
#include "ebmlab/lab/config.hpp"
#include "ebmlab/lab/csv.hpp"
#include "ebmlab/lab/experiments.hpp"

namespace {

constexpr int kConfigError = 2;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App& sub, Options& options) {
  sub.add_option("--config", options.config_path, "JSON experiment configuration")
      ->check(CLI::ExistingFile);
  sub.add_option("--out", options.out_dir, "output directory (overrides output_path)");
  sub.add_option("--seed", options.seed, "root seed (overrides seed)");
}

}  // namespace

int main(int argc, char** argv) {
  namespace lab = ebmlab::lab;

  CLI::App app{"Seeded experiments on tilted reversible chains and RLVR families"};
  app.set_version_flag("--version", lab::artifact_version());
  app.require_subcommand(1);

  Options options;
  std::vector<std::pair<CLI::App*, std::optional<lab::Experiment>>> commands;
  for (lab::Experiment e : lab::kAllExperiments) {
    auto* sub = app.add_subcommand(std::string(lab::to_string(e)), "run the " +
                                                                       std::string(lab::to_string(e)) +
                                                                       " experiment");
    add_common(*sub, options);
    commands.emplace_back(sub, e);
  }
  auto* all = app.add_subcommand("all", "run every experiment");
  add_common(*all, options);
  commands.emplace_back(all, std::nullopt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  std::optional<lab::Experiment> selected;
  bool run_all = false;
  for (const auto& [sub, experiment] : commands) {
    if (!sub->parsed()) continue;
    selected = experiment;
    run_all = !experiment.has_value();
  }

  lab::ExperimentConfig config;
  try {
    if (!options.config_path.empty()) config = lab::parse_config(options.config_path);
  } catch (const lab::ConfigError& e) {
    std::cerr << "lab: " << e.what() << "\n";
    return kConfigError;
  }
  if (!run_all && config.experiment && config.experiment != selected) {
    std::cerr << "lab: RangeViolation(\"experiment\"): config names "
              << lab::to_string(*config.experiment) << " but the subcommand is "
              << lab::to_string(*selected) << "\n";
    return kConfigError;
  }
  if (options.seed) config.seed = *options.seed;
  if (!options.out_dir.empty()) config.output_path = options.out_dir;

  std::vector<lab::Experiment> experiments;
  if (run_all) {
    experiments.assign(lab::kAllExperiments.begin(), lab::kAllExperiments.end());
  } else {
    experiments.push_back(*selected);
  }

  lab::RunManifest manifest;
  try {
    manifest = lab::run(config, experiments, config.output_path, lab::default_worker_count());
  } catch (const ebmlab::Error& e) {
    std::cerr << "lab: " << e.what() << "\n";
    return kConfigError;
  }

  for (const auto& check : manifest.checks) {
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.name
              << " worst=" << lab::format_real(check.worst)
              << " tol=" << lab::format_real(check.tolerance);
    if (!check.passed && !check.detail.empty()) std::cout << " (" << check.detail << ")";
    std::cout << "\n";
  }
  std::cout << "config " << manifest.config_digest << ", outputs in " << config.output_path
            << "\n";
  return manifest.exit_code();
}
