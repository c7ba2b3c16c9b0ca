#pragma once

#include <string>
#include <vector>

namespace ebmlab::lab {

enum class Failure { kNone, kInvariant, kNumerical };

struct CheckResult {
  /// "<experiment>/<check>"; unique within a manifest.
  std::string name;
  bool passed = true;
  /// Worst residual or margin observed; its meaning is fixed per check.
  double worst = 0.0;
  double tolerance = 0.0;
  std::string detail;
  Failure failure = Failure::kNone;
};

struct RunManifest {
  std::string config_digest;
  std::string version;
  std::string canonical_config;
  std::vector<CheckResult> checks;

  bool all_passed() const;
  /// 0 when every check passed, 4 if any numerical failure, otherwise 3.
  int exit_code() const;
  /// Throws InvalidScenario when a check name repeats.
  void add(CheckResult check);
};

std::string to_json(const RunManifest& manifest);

/// Package version baked in at build time.
std::string artifact_version();

}  // namespace ebmlab::lab
