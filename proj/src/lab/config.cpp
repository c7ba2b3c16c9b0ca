#include "ebmlab/lab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace ebmlab::lab {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 7> kExperimentNames = {
    "verify-db", "evolve", "hitting", "spectral", "rlvr-identities", "rlvr-flow", "entropy-trace",
};

[[noreturn]] void range_error(const std::string& key, const std::string& what) {
  throw ConfigError(ConfigError::Kind::kRangeViolation, key, what);
}

std::uint64_t read_unsigned(const json& value, const std::string& key, std::uint64_t lo,
                            std::uint64_t hi) {
  std::uint64_t out = 0;
  if (value.is_number_unsigned()) {
    out = value.get<std::uint64_t>();
  } else if (value.is_number_integer()) {
    range_error(key, "must be >= " + std::to_string(lo));
  } else {
    range_error(key, "must be an integer");
  }
  if (out < lo || out > hi) {
    range_error(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return out;
}

int read_int(const json& value, const std::string& key, int lo, int hi) {
  return static_cast<int>(read_unsigned(value, key, static_cast<std::uint64_t>(lo),
                                        static_cast<std::uint64_t>(hi)));
}

double read_real(const json& value, const std::string& key) {
  if (!value.is_number()) range_error(key, "must be a number");
  const double out = value.get<double>();
  if (!std::isfinite(out)) range_error(key, "must be finite");
  return out;
}

std::string read_string(const json& value, const std::string& key) {
  if (!value.is_string()) range_error(key, "must be a string");
  return value.get<std::string>();
}

json to_json(const ExperimentConfig& c) {
  json j = json::object();
  if (c.experiment) j["experiment"] = std::string(to_string(*c.experiment));
  j["seed"] = c.seed;
  j["n_states"] = c.n_states;
  j["n_prompts"] = c.n_prompts;
  j["n_responses"] = c.n_responses;
  j["beta"] = c.beta;
  j["steps"] = c.steps;
  if (c.threshold_b) j["threshold_b"] = *c.threshold_b;
  j["lambda_grid"] = c.lambda_grid;
  j["output_path"] = c.output_path;
  j["n_scenarios"] = c.n_scenarios;
  j["mc_replicas"] = c.mc_replicas;
  if (c.family) j["family"] = scenarios::to_string(*c.family);
  return j;
}

}  // namespace

std::string_view to_string(Experiment experiment) {
  return kExperimentNames[static_cast<std::size_t>(experiment)];
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (std::size_t i = 0; i < kExperimentNames.size(); ++i) {
    if (kExperimentNames[i] == name) return static_cast<Experiment>(i);
  }
  return std::nullopt;
}

std::optional<scenarios::FamilyKind> parse_family_kind(std::string_view name) {
  using scenarios::FamilyKind;
  for (FamilyKind kind : {FamilyKind::kMixed, FamilyKind::kHighAccuracy, FamilyKind::kAllCorrect}) {
    if (name == scenarios::to_string(kind)) return kind;
  }
  if (name == "random") return FamilyKind::kMixed;
  return std::nullopt;
}

ConfigError::ConfigError(Kind kind, std::string key, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + (key.empty() ? "" : "(\"" + key + "\")") +
                         ": " + what),
      kind_(kind),
      key_(std::move(key)) {}

std::string_view to_string(ConfigError::Kind kind) {
  switch (kind) {
    case ConfigError::Kind::kMalformedJson: return "MalformedJson";
    case ConfigError::Kind::kUnknownKey: return "UnknownKey";
    case ConfigError::Kind::kRangeViolation: return "RangeViolation";
  }
  return "ConfigError";
}

ExperimentConfig parse_config_text(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigError::Kind::kMalformedJson, "", e.what());
  }
  if (!root.is_object()) {
    throw ConfigError(ConfigError::Kind::kMalformedJson, "", "top level must be a JSON object");
  }

  ExperimentConfig c;
  for (const auto& [key, value] : root.items()) {
    if (key == "experiment") {
      const auto parsed = parse_experiment(read_string(value, key));
      if (!parsed) range_error(key, "unknown experiment \"" + value.get<std::string>() + "\"");
      c.experiment = parsed;
    } else if (key == "seed") {
      c.seed = read_unsigned(value, key, 0, std::numeric_limits<std::uint64_t>::max());
    } else if (key == "n_states") {
      c.n_states = read_int(value, key, limits::kMinStates, limits::kMaxStates);
    } else if (key == "n_prompts") {
      c.n_prompts = read_int(value, key, 1, limits::kMaxPrompts);
    } else if (key == "n_responses") {
      c.n_responses = read_int(value, key, limits::kMinResponses, limits::kMaxResponses);
    } else if (key == "beta") {
      c.beta = read_real(value, key);
      if (!(c.beta > 0.0) || c.beta > limits::kMaxBeta) range_error(key, "must lie in (0, 1000]");
    } else if (key == "steps") {
      c.steps = read_int(value, key, 1, limits::kMaxSteps);
    } else if (key == "threshold_b") {
      if (value.is_null()) continue;
      c.threshold_b = read_real(value, key);
      if (*c.threshold_b < 0.0) range_error(key, "must be >= 0");
    } else if (key == "lambda_grid") {
      if (!value.is_array()) range_error(key, "must be an array of numbers");
      if (value.size() > limits::kMaxGridPoints) range_error(key, "has too many points");
      c.lambda_grid.clear();
      for (const auto& item : value) {
        const double lambda = read_real(item, key);
        if (lambda < 0.0) range_error(key, "entries must be >= 0");
        c.lambda_grid.push_back(lambda);
      }
    } else if (key == "output_path") {
      c.output_path = read_string(value, key);
      if (c.output_path.empty()) range_error(key, "must not be empty");
    } else if (key == "n_scenarios") {
      c.n_scenarios = read_int(value, key, 1, limits::kMaxScenarios);
    } else if (key == "mc_replicas") {
      c.mc_replicas = read_unsigned(value, key, limits::kMinReplicas, limits::kMaxReplicas);
    } else if (key == "family") {
      const auto parsed = parse_family_kind(read_string(value, key));
      if (!parsed) range_error(key, "expected mixed, high-accuracy or all-correct");
      c.family = parsed;
    } else {
      throw ConfigError(ConfigError::Kind::kUnknownKey, key, "unknown configuration key");
    }
  }
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError(ConfigError::Kind::kMalformedJson, "",
                      "cannot read configuration file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string serialize(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string config_digest(const ExperimentConfig& config) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize(config)) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::vector<double> effective_lambda_grid(const ExperimentConfig& config) {
  if (!config.lambda_grid.empty()) return config.lambda_grid;
  constexpr int kPoints = 50;
  std::vector<double> grid;
  const double top = 2.0 / config.beta;
  for (int k = 0; k < kPoints; ++k) grid.push_back(top * k / (kPoints - 1));
  return grid;
}

}  // namespace ebmlab::lab
