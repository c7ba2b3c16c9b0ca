#pragma once

// Seeded scenario generators. Scenario `index` under `seed` always draws
// from derive_seed(seed, index), so adding scenarios never perturbs earlier
// ones.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ebmlab/chain.hpp"
#include "ebmlab/random.hpp"
#include "ebmlab/rlvr.hpp"

namespace ebmlab::scenarios {

inline constexpr double kMinBeta = 0.25;
inline constexpr double kMaxBeta = 4.0;

/// Erdos-Renyi graph with edge probability min(1, 3 ln n / n), redrawn until
/// connected.
inline ProposalGraph connected_random_graph(Rng& rng, Eigen::Index n) {
  const double p = n <= 2 ? 1.0 : std::min(1.0, 3.0 * std::log(static_cast<double>(n)) / n);
  while (true) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a + 1; b < n; ++b)
        if (rng.bernoulli(p)) edges.emplace_back(a, b);
    ProposalGraph g = ProposalGraph::from_edges(n, edges);
    if (g.connected()) return g;
  }
}

/// h ~ N(0,1) i.i.d., p_data ~ Dirichlet(1), Erdos-Renyi proposal graph.
inline ChainScenario<double> random_chain_scenario(std::uint64_t seed, std::uint64_t index,
                                                   Eigen::Index n_states, double beta) {
  const std::uint64_t scenario_seed = derive_seed(seed, index);
  Rng rng(scenario_seed);
  ChainScenario<double> s;
  s.seed = scenario_seed;
  s.beta = beta;
  s.proposal_graph = connected_random_graph(rng, n_states);
  s.p_data = Distribution<double>::from_probabilities(rng.dirichlet_flat(n_states));
  s.h.resize(n_states);
  for (Eigen::Index i = 0; i < n_states; ++i) s.h(i) = rng.normal();
  return s;
}

/// Variant used by property suites: n drawn from {8, 16, 32, 64} and
/// beta log-uniform on [0.25, 4].
inline ChainScenario<double> property_chain_scenario(std::uint64_t seed, std::uint64_t index) {
  Rng rng(derive_seed(derive_seed(seed, index), 0xA11CE));
  const Eigen::Index sizes[] = {8, 16, 32, 64};
  const Eigen::Index n = sizes[rng.below(4)];
  const double beta = rng.log_uniform(kMinBeta, kMaxBeta);
  return random_chain_scenario(seed, index, n, beta);
}

/// Path-graph scenario with uniform p_data and strictly increasing h
/// (increments beta * U[0.25, 1]). Redrawn until every state except the
/// potential minimizer has strictly negative drift, so the hitting bound's
/// drift condition holds for any target set containing the minimizer.
inline ChainScenario<double> birth_death_scenario(std::uint64_t seed, std::uint64_t index,
                                                  Eigen::Index n_states, double beta) {
  const std::uint64_t scenario_seed = derive_seed(seed, index);
  Rng rng(scenario_seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    ChainScenario<double> s;
    s.seed = scenario_seed;
    s.beta = beta;
    s.proposal_graph = ProposalGraph::path(n_states);
    s.p_data = Distribution<double>::uniform(n_states);
    s.h.resize(n_states);
    s.h(0) = 0.0;
    for (Eigen::Index i = 1; i < n_states; ++i) s.h(i) = s.h(i - 1) + beta * rng.uniform(0.25, 1.0);
    const ReversibleChain<double> chain = build_chain(s);
    Eigen::Index argmin = 0;
    chain.potential.minCoeff(&argmin);
    bool compliant = true;
    for (Eigen::Index f = 0; f < n_states; ++f) {
      if (f != argmin && !(drift(chain, f) < 0.0)) compliant = false;
    }
    if (compliant) return s;
  }
  throw Error(ErrorKind::kInvalidScenario, "could not draw a drift-compliant birth-death chain");
}

/// Start distributions: even draws are point masses, odd draws Dirichlet(1).
inline Distribution<double> random_start(std::uint64_t seed, std::uint64_t index,
                                         Eigen::Index n_states) {
  Rng rng(derive_seed(seed, index));
  if (index % 2 == 0) {
    return Distribution<double>::point_mass(n_states, static_cast<Eigen::Index>(rng.below(n_states)));
  }
  return Distribution<double>::from_probabilities(rng.dirichlet_flat(n_states));
}

enum class FamilyKind { kMixed, kHighAccuracy, kAllCorrect };

inline const char* to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::kMixed: return "mixed";
    case FamilyKind::kHighAccuracy: return "high-accuracy";
    case FamilyKind::kAllCorrect: return "all-correct";
  }
  return "unknown";
}

namespace detail {

inline Prompt<double> mixed_prompt(Rng& rng, Eigen::Index n_responses) {
  Prompt<double> p;
  p.inst = Distribution<double>::from_probabilities(rng.dirichlet_flat(n_responses));
  p.reward.resize(n_responses);
  while (true) {
    for (Eigen::Index y = 0; y < n_responses; ++y) p.reward(y) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double correct = p.reward.sum();
    if (correct > 0.0 && correct < static_cast<double>(n_responses)) return p;
  }
}

// Per-prompt target accuracy R* ~ U[0.99, 0.999]; pi_inst puts
// R_0 = odds^{-1}(odds(R*) e^{-1/beta}) on the correct block.
inline Prompt<double> high_accuracy_prompt(Rng& rng, Eigen::Index n_responses, double beta) {
  const Eigen::Index max_correct = std::max<Eigen::Index>(1, n_responses / 2);
  const Eigen::Index n_correct = 1 + static_cast<Eigen::Index>(rng.below(max_correct));
  const double r_star = rng.uniform(0.99, 0.999);
  const double odds0 = r_star / (1.0 - r_star) * std::exp(-1.0 / beta);
  const double r0 = odds0 / (1.0 + odds0);
  const Eigen::VectorXd right = rng.dirichlet_flat(n_correct);
  const Eigen::VectorXd wrong = rng.dirichlet_flat(n_responses - n_correct);
  Prompt<double> p;
  Eigen::VectorXd weights(n_responses);
  p.reward = Eigen::VectorXd::Zero(n_responses);
  for (Eigen::Index y = 0; y < n_correct; ++y) {
    weights(y) = r0 * right(y);
    p.reward(y) = 1.0;
  }
  for (Eigen::Index y = n_correct; y < n_responses; ++y) weights(y) = (1.0 - r0) * wrong(y - n_correct);
  p.inst = Distribution<double>::from_probabilities(weights);
  return p;
}

}  // namespace detail

/// Random RLVR family. Prompt weights ~ Dirichlet(1).
///  - mixed: pi_inst ~ Dirichlet(1), rewards Bernoulli(1/2) with both outcomes present;
///  - high-accuracy: per-prompt R* in [0.99, 0.999] by construction;
///  - all-correct: every reward is 1.
inline RlvrFamily<double> random_family(std::uint64_t seed, std::uint64_t index,
                                        Eigen::Index n_prompts, Eigen::Index n_responses,
                                        double beta, FamilyKind kind = FamilyKind::kMixed) {
  if (n_prompts < 1 || n_responses < 2) {
    throw Error(ErrorKind::kInvalidFamily, "need >= 1 prompt and >= 2 responses");
  }
  Rng rng(derive_seed(seed, index));
  std::vector<Prompt<double>> prompts;
  for (Eigen::Index i = 0; i < n_prompts; ++i) {
    switch (kind) {
      case FamilyKind::kMixed:
        prompts.push_back(detail::mixed_prompt(rng, n_responses));
        break;
      case FamilyKind::kHighAccuracy:
        prompts.push_back(detail::high_accuracy_prompt(rng, n_responses, beta));
        break;
      case FamilyKind::kAllCorrect: {
        Prompt<double> p;
        p.inst = Distribution<double>::from_probabilities(rng.dirichlet_flat(n_responses));
        p.reward = Eigen::VectorXd::Ones(n_responses);
        prompts.push_back(std::move(p));
        break;
      }
    }
  }
  auto weights = Distribution<double>::from_probabilities(rng.dirichlet_flat(n_prompts));
  return RlvrFamily<double>(std::move(prompts), std::move(weights), beta);
}

/// Mixed family with beta log-uniform on [0.25, 4].
inline RlvrFamily<double> property_family(std::uint64_t seed, std::uint64_t index,
                                          Eigen::Index n_prompts, Eigen::Index n_responses) {
  Rng rng(derive_seed(derive_seed(seed, index), 0xBE7A));
  const double beta = rng.log_uniform(kMinBeta, kMaxBeta);
  return random_family(seed, index, n_prompts, n_responses, beta, FamilyKind::kMixed);
}

}  // namespace ebmlab::scenarios
