#include "doctest.h"

#include <string>

#include "ebmlab/lab/config.hpp"

namespace lab = ebmlab::lab;
using Kind = lab::ConfigError::Kind;

namespace {

std::pair<Kind, std::string> error_of(const std::string& text) {
  try {
    lab::parse_config_text(text);
  } catch (const lab::ConfigError& e) {
    return {e.kind(), e.key()};
  }
  FAIL("expected a ConfigError for " << text);
  return {Kind::kMalformedJson, ""};
}

}  // namespace

TEST_CASE("defaults are filled in") {
  const auto c = lab::parse_config_text(R"({"experiment":"verify-db","seed":7})");
  CHECK(c.experiment == lab::Experiment::kVerifyDb);
  CHECK(c.seed == 7);
  CHECK(c.beta == 1.0);
  CHECK(c.steps == 200);
  CHECK(c.n_states == 32);
  CHECK(!c.threshold_b);
  CHECK(c.lambda_grid.empty());
}

TEST_CASE("range violations name the key") {
  CHECK(error_of(R"({"experiment":"evolve","beta":-1})") ==
        std::pair{Kind::kRangeViolation, std::string("beta")});
  CHECK(error_of(R"({"beta":0})").second == "beta");
  CHECK(error_of(R"({"beta":"one"})").second == "beta");
  CHECK(error_of(R"({"n_states":1})").second == "n_states");
  CHECK(error_of(R"({"n_states":4.5})").second == "n_states");
  CHECK(error_of(R"({"steps":0})").second == "steps");
  CHECK(error_of(R"({"seed":-3})").second == "seed");
  CHECK(error_of(R"({"n_prompts":0})").second == "n_prompts");
  CHECK(error_of(R"({"n_responses":1})").second == "n_responses");
  CHECK(error_of(R"({"threshold_b":-0.5})").second == "threshold_b");
  CHECK(error_of(R"({"lambda_grid":[0.1,-2]})").second == "lambda_grid");
  CHECK(error_of(R"({"lambda_grid":3})").second == "lambda_grid");
  CHECK(error_of(R"({"output_path":""})").second == "output_path");
  CHECK(error_of(R"({"experiment":"fly"})").second == "experiment");
  CHECK(error_of(R"({"family":"odd"})").second == "family");
  CHECK(error_of(R"({"mc_replicas":1})").second == "mc_replicas");
}

TEST_CASE("unknown keys and malformed JSON") {
  CHECK(error_of(R"({"seed":1,"colour":"red"})") ==
        std::pair{Kind::kUnknownKey, std::string("colour")});
  CHECK(error_of(R"({"seed":1,)").first == Kind::kMalformedJson);
  CHECK(error_of(R"([1,2,3])").first == Kind::kMalformedJson);
  CHECK(error_of("").first == Kind::kMalformedJson);
}

TEST_CASE("error messages carry the key") {
  try {
    lab::parse_config_text(R"({"beta":-1})");
  } catch (const lab::ConfigError& e) {
    CHECK(std::string(e.what()).find("RangeViolation(\"beta\")") != std::string::npos);
  }
}

TEST_CASE("full config round-trips through the canonical form") {
  const std::string text = R"({
    "experiment": "hitting", "seed": 18446744073709551615, "n_states": 17, "n_prompts": 3,
    "n_responses": 9, "beta": 0.1, "steps": 12, "threshold_b": 1.25,
    "lambda_grid": [0, 0.1, 0.30000000000000004, 7], "output_path": "out dir/x",
    "n_scenarios": 4, "mc_replicas": 1000, "family": "high-accuracy"
  })";
  const auto c = lab::parse_config_text(text);
  CHECK(c.seed == 18446744073709551615ULL);
  const std::string canonical = lab::serialize(c);
  const auto again = lab::parse_config_text(canonical);
  CHECK(again == c);
  CHECK(lab::serialize(again) == canonical);
  CHECK(lab::config_digest(again) == lab::config_digest(c));
  CHECK(lab::config_digest(c).size() == 16);

  auto changed = c;
  changed.beta = 0.2;
  CHECK(lab::config_digest(changed) != lab::config_digest(c));
}

TEST_CASE("key order does not change the canonical form") {
  const auto a = lab::parse_config_text(R"({"seed":3,"beta":2.5})");
  const auto b = lab::parse_config_text(R"({"beta":2.5,"seed":3})");
  CHECK(lab::serialize(a) == lab::serialize(b));
}

TEST_CASE("default lambda grid") {
  lab::ExperimentConfig c;
  c.beta = 0.5;
  const auto grid = lab::effective_lambda_grid(c);
  CHECK(grid.size() == 50);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == doctest::Approx(4.0).epsilon(1e-15));
  c.lambda_grid = {0.5, 1.5};
  CHECK(lab::effective_lambda_grid(c) == c.lambda_grid);
}

TEST_CASE("experiment names") {
  for (auto e : lab::kAllExperiments) CHECK(lab::parse_experiment(lab::to_string(e)) == e);
  CHECK(!lab::parse_experiment("all"));
}
