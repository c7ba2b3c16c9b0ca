#include "ebmlab/lab/manifest.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ebmlab/error.hpp"
#include "ebmlab/lab/csv.hpp"

namespace ebmlab::lab {

bool RunManifest::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

int RunManifest::exit_code() const {
  bool invariant = false;
  for (const auto& c : checks) {
    if (c.passed) continue;
    if (c.failure == Failure::kNumerical) return 4;
    invariant = true;
  }
  return invariant ? 3 : 0;
}

void RunManifest::add(CheckResult check) {
  for (const auto& existing : checks) {
    if (existing.name == check.name) {
      throw Error(ErrorKind::kInvalidScenario, "check " + check.name + " reported twice");
    }
  }
  checks.push_back(std::move(check));
}

namespace {

const char* failure_name(Failure failure) {
  switch (failure) {
    case Failure::kNone: return "none";
    case Failure::kInvariant: return "invariant";
    case Failure::kNumerical: return "numerical";
  }
  return "unknown";
}

// JSON has no NaN or infinity; reals go out as 17-digit strings so the
// manifest is as bit-stable as the CSVs.
nlohmann::ordered_json real(double value) { return format_real(value); }

}  // namespace

std::string to_json(const RunManifest& manifest) {
  nlohmann::ordered_json root;
  root["version"] = manifest.version;
  root["config_digest"] = manifest.config_digest;
  root["config"] = nlohmann::ordered_json::parse(manifest.canonical_config.empty()
                                                     ? std::string("{}")
                                                     : manifest.canonical_config);
  root["passed"] = manifest.all_passed();
  root["exit_code"] = manifest.exit_code();
  auto& checks = root["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : manifest.checks) {
    nlohmann::ordered_json entry;
    entry["name"] = c.name;
    entry["passed"] = c.passed;
    entry["worst"] = real(c.worst);
    entry["tolerance"] = real(c.tolerance);
    entry["failure"] = failure_name(c.failure);
    entry["detail"] = c.detail;
    checks.push_back(std::move(entry));
  }
  return root.dump(2) + "\n";
}

std::string artifact_version() {
#ifdef EBMLAB_VERSION
  return EBMLAB_VERSION;
#else
  return "unknown";
#endif
}

}  // namespace ebmlab::lab
