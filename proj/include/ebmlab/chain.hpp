#pragma once

// Reversible transition kernels built by reward-tilting a pretrained
// Metropolis kernel, together with the potential V that puts them in
// detailed-balance form, master-equation evolution, drift and hitting times.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ebmlab/ebm.hpp"
#include "ebmlab/probcore.hpp"
#include "ebmlab/random.hpp"

namespace ebmlab {

/// Undirected proposal graph without self-loops. Adjacency lists are sorted.
struct ProposalGraph {
  std::vector<std::vector<Eigen::Index>> adjacency;

  Eigen::Index size() const { return static_cast<Eigen::Index>(adjacency.size()); }
  Eigen::Index degree(Eigen::Index s) const {
    return static_cast<Eigen::Index>(adjacency[s].size());
  }

  static ProposalGraph from_edges(Eigen::Index n,
                                  const std::vector<std::pair<Eigen::Index, Eigen::Index>>& edges) {
    ProposalGraph g;
    g.adjacency.assign(n, {});
    for (auto [a, b] : edges) {
      if (a == b) continue;
      g.adjacency[a].push_back(b);
      g.adjacency[b].push_back(a);
    }
    for (auto& row : g.adjacency) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return g;
  }

  static ProposalGraph complete(Eigen::Index n) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a + 1; b < n; ++b) edges.emplace_back(a, b);
    return from_edges(n, edges);
  }

  static ProposalGraph path(Eigen::Index n) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
    for (Eigen::Index a = 0; a + 1 < n; ++a) edges.emplace_back(a, a + 1);
    return from_edges(n, edges);
  }

  static ProposalGraph cycle(Eigen::Index n) {
    ProposalGraph g = path(n);
    if (n > 2) {
      g.adjacency[0].push_back(n - 1);
      g.adjacency[n - 1].insert(g.adjacency[n - 1].begin(), 0);
      std::sort(g.adjacency[0].begin(), g.adjacency[0].end());
    }
    return g;
  }

  bool symmetric() const {
    for (Eigen::Index a = 0; a < size(); ++a) {
      for (Eigen::Index b : adjacency[a]) {
        if (b < 0 || b >= size() || b == a) return false;
        if (!std::binary_search(adjacency[b].begin(), adjacency[b].end(), a)) return false;
      }
    }
    return true;
  }

  bool connected() const {
    if (size() == 0) return false;
    std::vector<bool> seen(size(), false);
    std::deque<Eigen::Index> queue{0};
    seen[0] = true;
    Eigen::Index count = 1;
    while (!queue.empty()) {
      const Eigen::Index f = queue.front();
      queue.pop_front();
      for (Eigen::Index g : adjacency[f]) {
        if (!seen[g]) {
          seen[g] = true;
          ++count;
          queue.push_back(g);
        }
      }
    }
    return count == size();
  }
};

template <typename Scalar>
struct ChainScenario {
  Distribution<Scalar> p_data;
  ProposalGraph proposal_graph;
  Vector<Scalar> h;
  Scalar beta{1};
  std::uint64_t seed{0};

  Eigen::Index n_states() const { return p_data.size(); }
};

/// Row-stochastic kernel T(g|f) = kernel(f, g) with its potential and the
/// stationary distribution pi ∝ exp(-V).
template <typename Scalar>
struct ReversibleChain {
  Matrix<Scalar> kernel;
  Vector<Scalar> potential;
  Distribution<Scalar> stationary;
  Vector<Scalar> log_partition;

  Eigen::Index size() const { return kernel.rows(); }
};

template <typename Scalar>
struct Trajectory {
  std::vector<Distribution<Scalar>> snapshots;
  std::vector<Scalar> kl_trace;
  std::vector<Scalar> expected_potential_trace;
};

template <typename Scalar>
struct HittingAnalysis {
  Scalar threshold_b;
  std::vector<Eigen::Index> target_set;
  Scalar minimum_potential;
  Scalar gamma;
  Vector<Scalar> expected_times;
  /// (V(f) - m) / gamma; NaN when the drift condition fails.
  Vector<Scalar> bound_values;
  bool condition_holds;
  /// True when the bound was checked and held, or was vacuous.
  bool bound_holds;
  /// min over f outside B of (bound - time); +inf when B is everything,
  /// NaN when unchecked.
  Scalar worst_margin;
};

namespace detail {

template <typename Scalar>
void require_row_stochastic(const Matrix<Scalar>& kernel, const char* what) {
  using std::abs;
  if (kernel.rows() != kernel.cols() || kernel.rows() == 0) {
    throw Error(ErrorKind::kSizeMismatch, std::string(what) + " must be a nonempty square matrix");
  }
  for (Eigen::Index f = 0; f < kernel.rows(); ++f) {
    if ((kernel.row(f).array() < Scalar(0)).any() || !kernel.row(f).allFinite()) {
      throw Error(ErrorKind::kInvalidScenario,
                  std::string(what) + " row " + std::to_string(f) + " has invalid entries");
    }
    const Scalar excess = abs(kernel.row(f).sum() - Scalar(1));
    if (excess > Scalar(tol::kStructural)) {
      throw Error(ErrorKind::kInvalidScenario,
                  std::string(what) + " row " + std::to_string(f) + " does not sum to 1",
                  static_cast<double>(excess));
    }
  }
}

}  // namespace detail

template <typename Scalar>
void validate_scenario(const ChainScenario<Scalar>& scenario) {
  const Eigen::Index n = scenario.n_states();
  if (n < 1 || scenario.proposal_graph.size() != n || scenario.h.size() != n) {
    throw Error(ErrorKind::kSizeMismatch, "scenario components disagree on the number of states");
  }
  if (!scenario.p_data.strictly_positive()) {
    throw Error(ErrorKind::kInvalidScenario, "p_data must be strictly positive");
  }
  if (!scenario.proposal_graph.symmetric()) {
    throw Error(ErrorKind::kInvalidScenario, "proposal graph is not symmetric");
  }
  if (!scenario.proposal_graph.connected()) {
    throw Error(ErrorKind::kDisconnectedGraph, "proposal graph is not connected");
  }
  detail::require_positive_beta(scenario.beta, /*allow_infinite=*/false);
}

/// Metropolis kernel over the proposal graph targeting p_data:
/// T(g|f) = (1/deg f) min(1, p(g) deg f / (p(f) deg g)) on edges, rejected
/// mass on the self-loop.
template <typename Scalar>
Matrix<Scalar> build_pretrained_kernel(const ChainScenario<Scalar>& scenario) {
  using std::exp;
  using std::log;
  validate_scenario(scenario);
  const Eigen::Index n = scenario.n_states();
  const auto& graph = scenario.proposal_graph;
  Matrix<Scalar> kernel = Matrix<Scalar>::Zero(n, n);
  if (n == 1) {
    kernel(0, 0) = Scalar(1);
    return kernel;
  }
  for (Eigen::Index f = 0; f < n; ++f) {
    const Scalar deg_f = static_cast<Scalar>(graph.degree(f));
    Scalar moved(0);
    for (Eigen::Index g : graph.adjacency[f]) {
      const Scalar deg_g = static_cast<Scalar>(graph.degree(g));
      const Scalar log_ratio = scenario.p_data.log_probability(g) -
                               scenario.p_data.log_probability(f) + log(deg_f) - log(deg_g);
      const Scalar accept = log_ratio >= Scalar(0) ? Scalar(1) : exp(log_ratio);
      kernel(f, g) = accept / deg_f;
      moved += kernel(f, g);
    }
    kernel(f, f) = std::max(Scalar(1) - moved, Scalar(0));
  }
  return kernel;
}

/// max over supported off-diagonal pairs of
/// |log K(g|f) - log K(f|g) - (log p(g) - log p(f))|.
template <typename Scalar>
Scalar pretrained_assumption_residual(const Matrix<Scalar>& pretrained,
                                      const Distribution<Scalar>& p_data) {
  using std::abs;
  using std::log;
  Scalar worst(0);
  for (Eigen::Index f = 0; f < pretrained.rows(); ++f) {
    for (Eigen::Index g = f + 1; g < pretrained.cols(); ++g) {
      if (pretrained(f, g) <= Scalar(0) || pretrained(g, f) <= Scalar(0)) continue;
      const Scalar r = log(pretrained(f, g)) - log(pretrained(g, f)) -
                       (p_data.log_probability(g) - p_data.log_probability(f));
      worst = std::max(worst, abs(r));
    }
  }
  return worst;
}

/// pi ∝ exp(-V).
template <typename Scalar>
Distribution<Scalar> stationary_from_potential(const Vector<Scalar>& potential) {
  if (!potential.allFinite()) {
    throw Error(ErrorKind::kInvalidDistribution, "potential must be finite");
  }
  return Distribution<Scalar>::from_log_weights(-potential);
}

/// Integrates log T(g|f)/T(f|g) = V(f) - V(g) along a BFS spanning tree
/// rooted at state 0 (V(0) = 0) and checks every other supported edge closes.
template <typename Scalar>
Vector<Scalar> recover_potential(const Matrix<Scalar>& kernel) {
  using std::abs;
  using std::log;
  if (kernel.rows() != kernel.cols() || kernel.rows() == 0) {
    throw Error(ErrorKind::kSizeMismatch, "kernel must be a nonempty square matrix");
  }
  const Eigen::Index n = kernel.rows();
  for (Eigen::Index f = 0; f < n; ++f) {
    for (Eigen::Index g = f + 1; g < n; ++g) {
      if ((kernel(f, g) > Scalar(0)) != (kernel(g, f) > Scalar(0))) {
        throw Error(ErrorKind::kAsymmetricSupport,
                    "one-sided support between states " + std::to_string(f) + " and " +
                        std::to_string(g));
      }
    }
  }

  Vector<Scalar> potential = Vector<Scalar>::Zero(n);
  std::vector<Eigen::Index> parent(n, -1);
  std::vector<bool> seen(n, false);
  std::deque<Eigen::Index> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    const Eigen::Index f = queue.front();
    queue.pop_front();
    for (Eigen::Index g = 0; g < n; ++g) {
      if (g == f || seen[g] || kernel(f, g) <= Scalar(0)) continue;
      seen[g] = true;
      parent[g] = f;
      potential(g) = potential(f) - (log(kernel(f, g)) - log(kernel(g, f)));
      queue.push_back(g);
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorKind::kDisconnectedGraph, "kernel support is not connected");
  }

  Scalar worst(0);
  for (Eigen::Index f = 0; f < n; ++f) {
    for (Eigen::Index g = f + 1; g < n; ++g) {
      if (kernel(f, g) <= Scalar(0) || parent[g] == f || parent[f] == g) continue;
      const Scalar r =
          log(kernel(f, g)) - log(kernel(g, f)) - (potential(f) - potential(g));
      worst = std::max(worst, abs(r));
    }
  }
  if (worst > Scalar(tol::kPotential)) {
    throw Error(ErrorKind::kCycleInconsistency,
                "kernel is not reversible; worst cycle residual " + std::to_string(worst),
                static_cast<double>(worst));
  }
  return potential;
}

/// Tilts a pretrained kernel row-wise with the potential-based reward
/// r(f,g) = h(g) - h(f):
///   T(g|f) = K(g|f) exp((h(g) - h(f))/beta) / Z(f),
///   V(s)   = -2 h(s)/beta - log p_data(s) - log Z(s).
/// The factor 2 comes from r(f,g) - r(g,f) = 2 (h(g) - h(f)).
template <typename Scalar>
ReversibleChain<Scalar> tilt_kernel(const Matrix<Scalar>& pretrained,
                                    const Vector<Scalar>& log_p_data, const Vector<Scalar>& h,
                                    Scalar beta) {
  using std::exp;
  using std::log;
  detail::require_positive_beta(beta, /*allow_infinite=*/false);
  detail::require_row_stochastic(pretrained, "pretrained kernel");
  const Eigen::Index n = pretrained.rows();
  if (h.size() != n || log_p_data.size() != n) {
    throw Error(ErrorKind::kSizeMismatch, "h and p_data must match the kernel size");
  }

  ReversibleChain<Scalar> chain;
  chain.kernel = Matrix<Scalar>::Zero(n, n);
  chain.log_partition.resize(n);
  Vector<Scalar> row_log(n);
  for (Eigen::Index f = 0; f < n; ++f) {
    for (Eigen::Index g = 0; g < n; ++g) {
      row_log(g) = pretrained(f, g) > Scalar(0)
                       ? log(pretrained(f, g)) + (h(g) - h(f)) / beta
                       : minus_infinity<Scalar>();
    }
    const Scalar log_z = log_sum_exp(row_log);
    chain.log_partition(f) = log_z;
    for (Eigen::Index g = 0; g < n; ++g) {
      if (row_log(g) != minus_infinity<Scalar>()) chain.kernel(f, g) = exp(row_log(g) - log_z);
    }
  }
  chain.potential =
      (Scalar(-2) * h.array() / beta - log_p_data.array() - chain.log_partition.array()).matrix();
  chain.stationary = stationary_from_potential(chain.potential);
  return chain;
}

/// As above with log p_data recovered from the pretrained kernel itself
/// (up to an additive constant, which V absorbs).
template <typename Scalar>
ReversibleChain<Scalar> tilt_kernel(const Matrix<Scalar>& pretrained, const Vector<Scalar>& h,
                                    Scalar beta) {
  const Vector<Scalar> log_p_data = -recover_potential(pretrained);
  return tilt_kernel(pretrained, log_p_data, h, beta);
}

template <typename Scalar>
ReversibleChain<Scalar> build_chain(const ChainScenario<Scalar>& scenario) {
  return tilt_kernel(build_pretrained_kernel(scenario), scenario.p_data.log_weights(),
                     scenario.h, scenario.beta);
}

/// Wraps an arbitrary reversible kernel, recovering its potential.
template <typename Scalar>
ReversibleChain<Scalar> chain_from_kernel(const Matrix<Scalar>& kernel) {
  detail::require_row_stochastic(kernel, "kernel");
  ReversibleChain<Scalar> chain;
  chain.kernel = kernel;
  chain.potential = recover_potential(kernel);
  chain.stationary = stationary_from_potential(chain.potential);
  chain.log_partition = Vector<Scalar>::Zero(kernel.rows());
  return chain;
}

/// max_{f,g} |pi(f) T(g|f) - pi(g) T(f|g)|.
template <typename Scalar>
Scalar detailed_balance_residual(const ReversibleChain<Scalar>& chain) {
  using std::abs;
  const Vector<Scalar> pi = chain.stationary.probabilities();
  Scalar worst(0);
  for (Eigen::Index f = 0; f < chain.size(); ++f) {
    for (Eigen::Index g = f + 1; g < chain.size(); ++g) {
      worst = std::max(worst, abs(pi(f) * chain.kernel(f, g) - pi(g) * chain.kernel(g, f)));
    }
  }
  return worst;
}

/// max over supported pairs |log T(g|f) - log T(f|g) - (V(f) - V(g))|.
template <typename Scalar>
Scalar potential_form_residual(const ReversibleChain<Scalar>& chain) {
  using std::abs;
  using std::log;
  Scalar worst(0);
  for (Eigen::Index f = 0; f < chain.size(); ++f) {
    for (Eigen::Index g = f + 1; g < chain.size(); ++g) {
      const bool forward = chain.kernel(f, g) > Scalar(0);
      const bool backward = chain.kernel(g, f) > Scalar(0);
      if (!forward && !backward) continue;
      if (forward != backward) return std::numeric_limits<Scalar>::infinity();
      const Scalar r = log(chain.kernel(f, g)) - log(chain.kernel(g, f)) -
                       (chain.potential(f) - chain.potential(g));
      worst = std::max(worst, abs(r));
    }
  }
  return worst;
}

/// Potentials agree up to an additive constant: min_c max |a - b - c|.
template <typename Scalar>
Scalar potential_round_trip_residual(const Vector<Scalar>& a, const Vector<Scalar>& b) {
  const Vector<Scalar> d = a - b;
  return (d.maxCoeff() - d.minCoeff()) / Scalar(2);
}

template <typename Scalar>
Scalar row_sum_residual(const Matrix<Scalar>& kernel) {
  return (kernel.rowwise().sum().array() - Scalar(1)).abs().maxCoeff();
}

/// ||pi T - pi||_1.
template <typename Scalar>
Scalar stationarity_residual(const ReversibleChain<Scalar>& chain) {
  const Vector<Scalar> pi = chain.stationary.probabilities();
  return (chain.kernel.transpose() * pi - pi).cwiseAbs().sum();
}

/// Master equation P_{t+1}(g) = sum_f P_t(f) T(g|f) with KL(P_t || pi) and
/// L(t) = E_{P_t}[V] recorded at every step.
template <typename Scalar>
Trajectory<Scalar> evolve(const ReversibleChain<Scalar>& chain, const Distribution<Scalar>& p0,
                          int steps) {
  if (p0.size() != chain.size()) {
    throw Error(ErrorKind::kSizeMismatch, "start distribution does not match the chain");
  }
  if (steps < 0) throw Error(ErrorKind::kInvalidScenario, "steps must be nonnegative");
  Trajectory<Scalar> out;
  out.snapshots.reserve(steps + 1);
  out.kl_trace.reserve(steps + 1);
  out.expected_potential_trace.reserve(steps + 1);
  const Matrix<Scalar> forward = chain.kernel.transpose();
  Vector<Scalar> p = p0.probabilities();
  for (int t = 0; t <= steps; ++t) {
    auto snapshot = t == 0 ? p0 : Distribution<Scalar>::from_probabilities(p);
    out.kl_trace.push_back(kl_divergence(snapshot, chain.stationary));
    out.expected_potential_trace.push_back(snapshot.expect(chain.potential));
    out.snapshots.push_back(std::move(snapshot));
    if (t < steps) p = forward * p;
  }
  return out;
}

/// Largest single-step increase of the KL trace (<= 0 when monotone).
template <typename Scalar>
Scalar worst_kl_increase(const Trajectory<Scalar>& trajectory) {
  Scalar worst = -std::numeric_limits<Scalar>::infinity();
  for (std::size_t t = 1; t < trajectory.kl_trace.size(); ++t) {
    worst = std::max(worst, trajectory.kl_trace[t] - trajectory.kl_trace[t - 1]);
  }
  return worst;
}

/// Delta(f) = sum_g T(g|f) (V(g) - V(f)).
template <typename Scalar>
Scalar drift(const ReversibleChain<Scalar>& chain, Eigen::Index f) {
  if (f < 0 || f >= chain.size()) {
    throw Error(ErrorKind::kSizeMismatch, "state index out of range");
  }
  Scalar acc(0);
  for (Eigen::Index g = 0; g < chain.size(); ++g) {
    acc += chain.kernel(f, g) * (chain.potential(g) - chain.potential(f));
  }
  return acc;
}

template <typename Scalar>
Vector<Scalar> drift_vector(const ReversibleChain<Scalar>& chain) {
  Vector<Scalar> d(chain.size());
  for (Eigen::Index f = 0; f < chain.size(); ++f) d(f) = drift(chain, f);
  return d;
}

/// E_{f ~ pi}[Delta(f)]; zero for any reversible chain.
template <typename Scalar>
Scalar mean_drift(const ReversibleChain<Scalar>& chain) {
  return chain.stationary.expect(drift_vector(chain));
}

namespace detail {

template <typename Scalar>
std::vector<bool> target_mask(Eigen::Index n, const std::vector<Eigen::Index>& target_set) {
  if (target_set.empty()) throw Error(ErrorKind::kEmptyTargetSet, "target set is empty");
  std::vector<bool> in_target(n, false);
  for (Eigen::Index s : target_set) {
    if (s < 0 || s >= n) throw Error(ErrorKind::kSizeMismatch, "target state out of range");
    in_target[s] = true;
  }
  return in_target;
}

}  // namespace detail

/// Exact E_f[tau_B] by first-step analysis: E = 0 on B and
/// (I - T_AA) E_A = 1 on the complement A.
template <typename Scalar>
Vector<Scalar> expected_hitting_times(const ReversibleChain<Scalar>& chain,
                                      const std::vector<Eigen::Index>& target_set) {
  using std::abs;
  const Eigen::Index n = chain.size();
  const std::vector<bool> in_target = detail::target_mask<Scalar>(n, target_set);

  // Every state outside B must reach B through supported transitions.
  std::vector<bool> reaches = in_target;
  std::deque<Eigen::Index> queue;
  for (Eigen::Index s = 0; s < n; ++s)
    if (in_target[s]) queue.push_back(s);
  while (!queue.empty()) {
    const Eigen::Index g = queue.front();
    queue.pop_front();
    for (Eigen::Index f = 0; f < n; ++f) {
      if (!reaches[f] && chain.kernel(f, g) > Scalar(0)) {
        reaches[f] = true;
        queue.push_back(f);
      }
    }
  }
  for (Eigen::Index f = 0; f < n; ++f) {
    if (!reaches[f]) {
      throw Error(ErrorKind::kSingularSystem,
                  "state " + std::to_string(f) + " cannot reach the target set");
    }
  }

  std::vector<Eigen::Index> outside;
  for (Eigen::Index s = 0; s < n; ++s)
    if (!in_target[s]) outside.push_back(s);
  Vector<Scalar> times = Vector<Scalar>::Zero(n);
  if (outside.empty()) return times;

  const auto m = static_cast<Eigen::Index>(outside.size());
  Matrix<Scalar> system(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      system(i, j) = (i == j ? Scalar(1) : Scalar(0)) - chain.kernel(outside[i], outside[j]);

  const Eigen::PartialPivLU<Matrix<Scalar>> lu(system);
  const Scalar smallest_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(smallest_pivot >= Scalar(tol::kPivot))) {
    throw Error(ErrorKind::kSingularSystem,
                "hitting-time system is singular (pivot " + std::to_string(smallest_pivot) + ")",
                static_cast<double>(smallest_pivot));
  }
  const Vector<Scalar> solution = lu.solve(Vector<Scalar>::Ones(m));
  for (Eigen::Index i = 0; i < m; ++i) times(outside[i]) = std::max(solution(i), Scalar(0));
  return times;
}

/// Drift-condition hitting bound with B = {V <= threshold_b}:
/// gamma = min_{f not in B} -Delta(f); if gamma > 0 then
/// E_f[tau_B] <= (V(f) - min V) / gamma is checked for every f.
template <typename Scalar>
HittingAnalysis<Scalar> hitting_bound_check(const ReversibleChain<Scalar>& chain,
                                            Scalar threshold_b) {
  const Eigen::Index n = chain.size();
  HittingAnalysis<Scalar> out;
  out.threshold_b = threshold_b;
  for (Eigen::Index s = 0; s < n; ++s)
    if (chain.potential(s) <= threshold_b) out.target_set.push_back(s);
  if (out.target_set.empty()) {
    throw Error(ErrorKind::kEmptyTargetSet,
                "no state has potential <= " + std::to_string(threshold_b));
  }
  out.minimum_potential = chain.potential.minCoeff();
  out.expected_times = expected_hitting_times(chain, out.target_set);

  out.gamma = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index f = 0; f < n; ++f) {
    if (chain.potential(f) > threshold_b) out.gamma = std::min(out.gamma, -drift(chain, f));
  }
  out.condition_holds = out.gamma > Scalar(0);
  out.bound_holds = true;
  if (!out.condition_holds) {
    out.bound_values = Vector<Scalar>::Constant(n, std::numeric_limits<Scalar>::quiet_NaN());
    out.worst_margin = std::numeric_limits<Scalar>::quiet_NaN();
    return out;
  }
  out.bound_values.resize(n);
  out.worst_margin = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index f = 0; f < n; ++f) {
    out.bound_values(f) = std::isinf(out.gamma)
                              ? Scalar(0)
                              : (chain.potential(f) - out.minimum_potential) / out.gamma;
    if (chain.potential(f) <= threshold_b) continue;
    const Scalar margin = out.bound_values(f) - out.expected_times(f);
    out.worst_margin = std::min(out.worst_margin, margin);
    if (margin < -Scalar(tol::kBoundSlack)) out.bound_holds = false;
  }
  return out;
}

struct HittingTimeEstimate {
  double mean;
  double standard_error;
  std::uint64_t replicas;
};

/// Monte Carlo estimate of E_start[tau_B]. Replica r draws from its own
/// stream derive_seed(seed, r), so the estimate does not depend on how
/// replicas are scheduled.
template <typename Scalar>
HittingTimeEstimate estimate_hitting_time(const ReversibleChain<Scalar>& chain,
                                          const std::vector<Eigen::Index>& target_set,
                                          Eigen::Index start, std::uint64_t replicas,
                                          std::uint64_t seed,
                                          std::uint64_t max_steps = 100'000'000) {
  const Eigen::Index n = chain.size();
  const std::vector<bool> in_target = detail::target_mask<Scalar>(n, target_set);
  if (replicas < 2) throw Error(ErrorKind::kInvalidScenario, "need at least two replicas");

  std::vector<std::vector<double>> cumulative(n, std::vector<double>(n));
  for (Eigen::Index f = 0; f < n; ++f) {
    double acc = 0.0;
    for (Eigen::Index g = 0; g < n; ++g) {
      acc += static_cast<double>(chain.kernel(f, g));
      cumulative[f][g] = acc;
    }
  }

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t r = 0; r < replicas; ++r) {
    SplitMixStream stream(derive_seed(seed, r));
    Eigen::Index state = start;
    std::uint64_t steps = 0;
    while (!in_target[state]) {
      const auto& row = cumulative[state];
      const double u = stream.uniform() * row.back();
      auto it = std::upper_bound(row.begin(), row.end(), u);
      state = std::min<Eigen::Index>(it - row.begin(), n - 1);
      if (++steps > max_steps) {
        throw Error(ErrorKind::kNoConvergence, "Monte Carlo walk exceeded the step budget");
      }
    }
    const auto x = static_cast<double>(steps);
    sum += x;
    sum_sq += x * x;
  }
  const auto count = static_cast<double>(replicas);
  const double mean = sum / count;
  const double variance = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
  return {mean, std::sqrt(variance / count), replicas};
}

}  // namespace ebmlab
