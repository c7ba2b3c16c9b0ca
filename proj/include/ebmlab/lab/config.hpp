#pragma once

// Experiment configuration: JSON ingestion, validation and a canonical
// serialization whose hash identifies a run.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ebmlab/scenarios.hpp"

namespace ebmlab::lab {

enum class Experiment {
  kVerifyDb,
  kEvolve,
  kHitting,
  kSpectral,
  kRlvrIdentities,
  kRlvrFlow,
  kEntropyTrace,
};

inline constexpr std::array<Experiment, 7> kAllExperiments = {
    Experiment::kVerifyDb,       Experiment::kEvolve,   Experiment::kHitting,
    Experiment::kSpectral,       Experiment::kRlvrIdentities, Experiment::kRlvrFlow,
    Experiment::kEntropyTrace,
};

std::string_view to_string(Experiment experiment);
std::optional<Experiment> parse_experiment(std::string_view name);
std::optional<scenarios::FamilyKind> parse_family_kind(std::string_view name);

/// Documented ranges (inclusive).
namespace limits {
inline constexpr int kMinStates = 2;
inline constexpr int kMaxStates = 512;
inline constexpr int kMaxPrompts = 4096;
inline constexpr int kMinResponses = 2;
inline constexpr int kMaxResponses = 1024;
inline constexpr double kMaxBeta = 1e3;
inline constexpr int kMaxSteps = 1000000;
inline constexpr int kMaxScenarios = 100000;
inline constexpr std::uint64_t kMinReplicas = 2;
inline constexpr std::uint64_t kMaxReplicas = 100000000;
inline constexpr std::size_t kMaxGridPoints = 10000;
}  // namespace limits

struct ExperimentConfig {
  /// Absent means "whatever the subcommand says".
  std::optional<Experiment> experiment;
  std::uint64_t seed = 0;
  int n_states = 32;
  int n_prompts = 16;
  int n_responses = 8;
  double beta = 1.0;
  int steps = 200;
  /// Hitting threshold measured above min V. Default: a quarter of the V range.
  std::optional<double> threshold_b;
  /// Empty means 50 evenly spaced points on [0, 2/beta].
  std::vector<double> lambda_grid;
  std::string output_path = "lab-out";
  int n_scenarios = 32;
  std::uint64_t mc_replicas = 100000;
  /// Absent means mixed for rlvr experiments and high-accuracy for the trace.
  std::optional<scenarios::FamilyKind> family;

  bool operator==(const ExperimentConfig&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { kMalformedJson, kUnknownKey, kRangeViolation };

  ConfigError(Kind kind, std::string key, const std::string& what);

  Kind kind() const { return kind_; }
  const std::string& key() const { return key_; }

 private:
  Kind kind_;
  std::string key_;
};

std::string_view to_string(ConfigError::Kind kind);

ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Sorted keys, every field present except unset optionals, shortest
/// round-trip reals. parse_config_text(serialize(c)) == c.
std::string serialize(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical form, as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

std::vector<double> effective_lambda_grid(const ExperimentConfig& config);

}  // namespace ebmlab::lab
