#pragma once

// Reward tilting: the closed-form optimum of KL-regularized reward
// maximization, pi*(y) = ref(y) exp(r(y)/beta) / Z.

#include <cmath>
#include <string>

#include "ebmlab/probcore.hpp"

namespace ebmlab {

template <typename Scalar>
struct TiltedPolicy {
  Distribution<Scalar> reference;
  Vector<Scalar> reward;
  Scalar beta;
  Scalar log_partition;
  Distribution<Scalar> policy;
};

namespace detail {

// beta = +inf is the no-tilt limit and is accepted where noted.
template <typename Scalar>
void require_positive_beta(Scalar beta, bool allow_infinite = true) {
  if (!(beta > Scalar(0)) || (!allow_infinite && !std::isfinite(beta))) {
    throw Error(ErrorKind::kNonPositiveBeta, "beta must be > 0, got " + std::to_string(beta));
  }
}

template <typename Scalar>
void require_reward_size(const Distribution<Scalar>& reference, const Vector<Scalar>& reward) {
  if (reference.size() != reward.size()) {
    throw Error(ErrorKind::kSizeMismatch, "reward has " + std::to_string(reward.size()) +
                                              " entries, reference has " +
                                              std::to_string(reference.size()));
  }
}

template <typename Scalar>
Vector<Scalar> tilted_log_weights(const Distribution<Scalar>& reference,
                                  const Vector<Scalar>& reward, Scalar beta) {
  Vector<Scalar> lw = reference.log_weights();
  for (Eigen::Index i = 0; i < lw.size(); ++i) {
    if (reference.supports(i)) lw(i) += reward(i) / beta;
  }
  return lw;
}

}  // namespace detail

/// log Z = log sum_y ref(y) exp(r(y)/beta).
template <typename Scalar>
Scalar log_partition(const Distribution<Scalar>& reference, const Vector<Scalar>& reward,
                     Scalar beta) {
  detail::require_positive_beta(beta);
  detail::require_reward_size(reference, reward);
  return log_sum_exp(detail::tilted_log_weights(reference, reward, beta));
}

template <typename Scalar>
TiltedPolicy<Scalar> tilt(const Distribution<Scalar>& reference, const Vector<Scalar>& reward,
                          Scalar beta) {
  detail::require_positive_beta(beta);
  detail::require_reward_size(reference, reward);
  const Vector<Scalar> lw = detail::tilted_log_weights(reference, reward, beta);
  return TiltedPolicy<Scalar>{reference, reward, beta, log_sum_exp(lw),
                              Distribution<Scalar>::from_log_weights(lw)};
}

/// J(pi) = E_pi[r] - beta KL(pi || ref).
template <typename Scalar>
Scalar objective(const Distribution<Scalar>& policy, const Distribution<Scalar>& reference,
                 const Vector<Scalar>& reward, Scalar beta) {
  detail::require_positive_beta(beta, /*allow_infinite=*/false);
  detail::require_reward_size(reference, reward);
  const Scalar divergence = kl_divergence(policy, reference);
  return policy.expect(reward) - beta * divergence;
}

/// |(J(pi_reas) - J(pi)) - beta KL(pi || pi_reas)| with pi_reas recomputed
/// from (reference, reward, beta).
template <typename Scalar>
Scalar suboptimality_identity_residual(const Distribution<Scalar>& policy,
                                       const Distribution<Scalar>& reference,
                                       const Vector<Scalar>& reward, Scalar beta) {
  using std::abs;
  const Distribution<Scalar> target = tilt(reference, reward, beta).policy;
  const Scalar gap = objective(target, reference, reward, beta) -
                     objective(policy, reference, reward, beta);
  return abs(gap - beta * kl_divergence(policy, target));
}

}  // namespace ebmlab
