#pragma once

// Binary-reward exponential-family path pi_lambda ∝ pi_inst exp(lambda r),
// its accuracy calculus, the natural-gradient flow that traces it and the
// entropy/accuracy bookkeeping along the way. The endpoint lambda = 1/beta
// is the KL-regularized optimum pi_reas.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ebmlab/ebm.hpp"
#include "ebmlab/probcore.hpp"

namespace ebmlab {

template <typename Scalar>
struct Prompt {
  Distribution<Scalar> inst;
  /// Verifier outcome per response, exactly 0 or 1.
  Vector<Scalar> reward;

  /// All supported responses share one reward value.
  bool degenerate() const {
    bool seen_zero = false;
    bool seen_one = false;
    for (Eigen::Index y = 0; y < reward.size(); ++y) {
      if (!inst.supports(y)) continue;
      (reward(y) == Scalar(1) ? seen_one : seen_zero) = true;
    }
    return !(seen_zero && seen_one);
  }
};

template <typename Scalar>
class RlvrFamily {
 public:
  RlvrFamily(std::vector<Prompt<Scalar>> prompts, Distribution<Scalar> prompt_weights,
             Scalar beta)
      : prompts_(std::move(prompts)), weights_(std::move(prompt_weights)), beta_(beta) {
    detail::require_positive_beta(beta_, /*allow_infinite=*/false);
    if (prompts_.empty()) throw Error(ErrorKind::kInvalidFamily, "family has no prompts");
    if (weights_.size() != static_cast<Eigen::Index>(prompts_.size())) {
      throw Error(ErrorKind::kSizeMismatch, "one prompt weight per prompt is required");
    }
    for (std::size_t i = 0; i < prompts_.size(); ++i) {
      const auto& p = prompts_[i];
      if (p.reward.size() != p.inst.size()) {
        throw Error(ErrorKind::kSizeMismatch,
                    "prompt " + std::to_string(i) + " reward/response size mismatch");
      }
      for (Eigen::Index y = 0; y < p.reward.size(); ++y) {
        if (p.reward(y) != Scalar(0) && p.reward(y) != Scalar(1)) {
          throw Error(ErrorKind::kInvalidFamily,
                      "prompt " + std::to_string(i) + " has a non-binary reward");
        }
      }
    }
  }

  const std::vector<Prompt<Scalar>>& prompts() const { return prompts_; }
  const Prompt<Scalar>& prompt(std::size_t i) const { return prompts_[i]; }
  const Distribution<Scalar>& prompt_weights() const { return weights_; }
  Scalar weight(std::size_t i) const { return weights_.probability(static_cast<Eigen::Index>(i)); }
  Scalar beta() const { return beta_; }
  Scalar target_lambda() const { return Scalar(1) / beta_; }
  std::size_t size() const { return prompts_.size(); }

  bool has_degenerate_prompt() const {
    for (const auto& p : prompts_)
      if (p.degenerate()) return true;
    return false;
  }

 private:
  std::vector<Prompt<Scalar>> prompts_;
  Distribution<Scalar> weights_;
  Scalar beta_;
};

template <typename Scalar>
struct PathPoint {
  Scalar lambda;
  /// 1/beta - lambda.
  Scalar delta;
  std::vector<Distribution<Scalar>> tilted;
  std::vector<BernoulliRate<Scalar>> accuracy;
  std::vector<Scalar> log_partition;

  Scalar mean_accuracy(const RlvrFamily<Scalar>& family) const {
    Scalar acc(0);
    for (std::size_t i = 0; i < accuracy.size(); ++i) acc += family.weight(i) * accuracy[i].value();
    return acc;
  }
  Scalar mean_entropy(const RlvrFamily<Scalar>& family) const {
    Scalar acc(0);
    for (std::size_t i = 0; i < tilted.size(); ++i) acc += family.weight(i) * entropy(tilted[i]);
    return acc;
  }
};

template <typename Scalar>
struct FlowState {
  Scalar t;
  /// (1 - exp(-beta t)) / beta.
  Scalar schedule_lambda;
  /// lambda_t(x) = E_{pi_t}[r - beta log(pi_t/pi_inst) - beta].
  std::vector<Scalar> lagrange;
};

namespace detail {

template <typename Scalar>
struct PromptTilt {
  Distribution<Scalar> policy;
  BernoulliRate<Scalar> accuracy;
  Scalar log_partition;
};

// Defined for any real lambda so finite differences can straddle 0.
template <typename Scalar>
PromptTilt<Scalar> tilt_prompt(const Prompt<Scalar>& prompt, Scalar lambda) {
  using std::exp;
  const Eigen::Index n = prompt.inst.size();
  Vector<Scalar> lw = prompt.inst.log_weights();
  Vector<Scalar> correct = Vector<Scalar>::Constant(n, minus_infinity<Scalar>());
  Vector<Scalar> wrong = Vector<Scalar>::Constant(n, minus_infinity<Scalar>());
  // Shift by the largest exponent so a prompt with constant reward is left
  // exactly untouched.
  Scalar shift = minus_infinity<Scalar>();
  for (Eigen::Index y = 0; y < n; ++y)
    if (prompt.inst.supports(y)) shift = std::max(shift, lambda * prompt.reward(y));
  for (Eigen::Index y = 0; y < n; ++y) {
    if (!prompt.inst.supports(y)) continue;
    lw(y) += lambda * prompt.reward(y) - shift;
    (prompt.reward(y) == Scalar(1) ? correct : wrong)(y) = lw(y);
  }
  const Scalar log_z = log_sum_exp(lw);
  const Scalar log_correct = log_sum_exp(correct);
  const Scalar log_wrong = log_sum_exp(wrong);
  return {Distribution<Scalar>::from_log_weights(lw),
          BernoulliRate<Scalar>::from_complementary(exp(log_correct - log_z),
                                                    exp(log_wrong - log_z)),
          shift + log_z};
}

template <typename Scalar>
void require_nonnegative_lambda(Scalar lambda) {
  if (!(lambda >= Scalar(0))) {
    throw Error(ErrorKind::kNegativeLambda, "lambda must be >= 0, got " + std::to_string(lambda));
  }
}

template <typename Scalar>
Scalar path_kl_to_target(const Prompt<Scalar>& prompt, Scalar lambda, Scalar target_lambda) {
  return kl_divergence(tilt_prompt(prompt, target_lambda).policy,
                       tilt_prompt(prompt, lambda).policy);
}

inline constexpr double kLambdaStep = 1e-5;
inline constexpr double kTimeStep = 1e-4;

}  // namespace detail

template <typename Scalar>
PathPoint<Scalar> path_point(const RlvrFamily<Scalar>& family, Scalar lambda) {
  detail::require_nonnegative_lambda(lambda);
  PathPoint<Scalar> point;
  point.lambda = lambda;
  point.delta = family.target_lambda() - lambda;
  for (const auto& prompt : family.prompts()) {
    auto tilted = detail::tilt_prompt(prompt, lambda);
    point.tilted.push_back(std::move(tilted.policy));
    point.accuracy.push_back(tilted.accuracy);
    point.log_partition.push_back(tilted.log_partition);
  }
  return point;
}

/// pi_reas: the path at lambda = 1/beta.
template <typename Scalar>
PathPoint<Scalar> reasoning_target(const RlvrFamily<Scalar>& family) {
  return path_point(family, family.target_lambda());
}

/// max over non-degenerate prompts |dR/dlambda (central FD) - R(1 - R)|.
template <typename Scalar>
Scalar accuracy_derivative_check(const RlvrFamily<Scalar>& family, Scalar lambda) {
  using std::abs;
  detail::require_nonnegative_lambda(lambda);
  const Scalar h(detail::kLambdaStep);
  Scalar worst(0);
  for (const auto& prompt : family.prompts()) {
    if (prompt.degenerate()) continue;
    const auto here = detail::tilt_prompt(prompt, lambda).accuracy;
    const Scalar up = detail::tilt_prompt(prompt, lambda + h).accuracy.value();
    const Scalar down = detail::tilt_prompt(prompt, lambda - h).accuracy.value();
    const Scalar fd = (up - down) / (Scalar(2) * h);
    worst = std::max(worst, abs(fd - here.value() * here.complement()));
  }
  return worst;
}

/// max |d log Z/dlambda (central FD) - R|.
template <typename Scalar>
Scalar log_partition_derivative_check(const RlvrFamily<Scalar>& family, Scalar lambda) {
  using std::abs;
  detail::require_nonnegative_lambda(lambda);
  const Scalar h(detail::kLambdaStep);
  Scalar worst(0);
  for (const auto& prompt : family.prompts()) {
    const auto here = detail::tilt_prompt(prompt, lambda);
    const Scalar fd = (detail::tilt_prompt(prompt, lambda + h).log_partition -
                       detail::tilt_prompt(prompt, lambda - h).log_partition) /
                      (Scalar(2) * h);
    worst = std::max(worst, abs(fd - here.accuracy.value()));
  }
  return worst;
}

/// max over non-degenerate prompts of |dD/dlambda (central FD) + (R* - R)|
/// with D(lambda) = KL(pi_reas || pi_lambda).
template <typename Scalar>
Scalar kl_derivative_check(const RlvrFamily<Scalar>& family, Scalar lambda) {
  using std::abs;
  detail::require_nonnegative_lambda(lambda);
  const Scalar h(detail::kLambdaStep);
  const Scalar target = family.target_lambda();
  Scalar worst(0);
  for (const auto& prompt : family.prompts()) {
    if (prompt.degenerate()) continue;
    const Scalar fd = (detail::path_kl_to_target(prompt, lambda + h, target) -
                       detail::path_kl_to_target(prompt, lambda - h, target)) /
                      (Scalar(2) * h);
    const Scalar r_star = detail::tilt_prompt(prompt, target).accuracy.value();
    const Scalar r_here = detail::tilt_prompt(prompt, lambda).accuracy.value();
    worst = std::max(worst, abs(fd + (r_star - r_here)));
  }
  return worst;
}

/// max_x |KL(pi_reas || pi_lambda) - D_Bern(R* || R_lambda)|. Exact on the
/// path for binary rewards.
template <typename Scalar>
Scalar bernoulli_identity_check(const RlvrFamily<Scalar>& family, Scalar lambda) {
  using std::abs;
  const PathPoint<Scalar> here = path_point(family, lambda);
  const PathPoint<Scalar> target = reasoning_target(family);
  Scalar worst(0);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Scalar kl = kl_divergence(target.tilted[i], here.tilted[i]);
    const Scalar bern = bernoulli_kl(target.accuracy[i], here.accuracy[i]);
    worst = std::max(worst, abs(kl - bern));
  }
  return worst;
}

/// J(pi) = sum_x p(x) (E_pi[r] - beta KL(pi || pi_inst)) for one policy row per prompt.
template <typename Scalar>
Scalar family_objective(const RlvrFamily<Scalar>& family,
                        const std::vector<Distribution<Scalar>>& policies) {
  if (policies.size() != family.size()) {
    throw Error(ErrorKind::kSizeMismatch, "one policy row per prompt is required");
  }
  Scalar acc(0);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& prompt = family.prompt(i);
    acc += family.weight(i) *
           objective(policies[i], prompt.inst, prompt.reward, family.beta());
  }
  return acc;
}

/// |J(pi_reas) - J(pi) - beta E_x KL(pi || pi_reas)| for arbitrary policy rows.
template <typename Scalar>
Scalar suboptimality_residual(const RlvrFamily<Scalar>& family,
                              const std::vector<Distribution<Scalar>>& policies) {
  using std::abs;
  const PathPoint<Scalar> target = reasoning_target(family);
  if (policies.size() != family.size()) {
    throw Error(ErrorKind::kSizeMismatch, "one policy row per prompt is required");
  }
  Scalar expected_kl(0);
  for (std::size_t i = 0; i < family.size(); ++i) {
    expected_kl += family.weight(i) * kl_divergence(policies[i], target.tilted[i]);
  }
  const Scalar gap = family_objective(family, target.tilted) - family_objective(family, policies);
  return abs(gap - family.beta() * expected_kl);
}

/// Suboptimality identity restricted to the path: pi = pi_lambda.
template <typename Scalar>
Scalar suboptimality_check(const RlvrFamily<Scalar>& family, Scalar lambda) {
  return suboptimality_residual(family, path_point(family, lambda).tilted);
}

/// w(y|x) = pi_reas / pi_lambda = (Z_lambda / Z*) exp(delta r).
template <typename Scalar>
Vector<Scalar> likelihood_ratio(const RlvrFamily<Scalar>& family, Scalar lambda,
                                std::size_t prompt_index) {
  using std::exp;
  const auto& prompt = family.prompt(prompt_index);
  const Scalar delta = family.target_lambda() - lambda;
  const Scalar log_z = detail::tilt_prompt(prompt, lambda).log_partition;
  const Scalar log_z_star = detail::tilt_prompt(prompt, family.target_lambda()).log_partition;
  return (log_z - log_z_star + delta * prompt.reward.array()).exp().matrix();
}

/// max_x |E_{pi_lambda}[w] - 1|.
template <typename Scalar>
Scalar likelihood_ratio_normalization_residual(const RlvrFamily<Scalar>& family, Scalar lambda) {
  using std::abs;
  const PathPoint<Scalar> here = path_point(family, lambda);
  Scalar worst(0);
  for (std::size_t i = 0; i < family.size(); ++i) {
    worst = std::max(worst, abs(here.tilted[i].expect(likelihood_ratio(family, lambda, i)) - Scalar(1)));
  }
  return worst;
}

template <typename Scalar>
Scalar flow_schedule(Scalar beta, Scalar t) {
  using std::expm1;
  return -expm1(-beta * t) / beta;
}

/// Closed-form natural-gradient flow: pi_t = pi_lambda at lambda = a(t).
template <typename Scalar>
std::pair<FlowState<Scalar>, PathPoint<Scalar>> flow_solution(const RlvrFamily<Scalar>& family,
                                                              Scalar t) {
  if (!(t >= Scalar(0))) {
    throw Error(ErrorKind::kNegativeLambda, "flow time must be >= 0");
  }
  FlowState<Scalar> state{t, flow_schedule(family.beta(), t), {}};
  PathPoint<Scalar> point = path_point(family, state.schedule_lambda);
  const Scalar beta = family.beta();
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& prompt = family.prompt(i);
    const auto& pi_t = point.tilted[i];
    Vector<Scalar> integrand = Vector<Scalar>::Zero(pi_t.size());
    for (Eigen::Index y = 0; y < pi_t.size(); ++y) {
      if (!pi_t.supports(y)) continue;
      integrand(y) = prompt.reward(y) -
                     beta * (pi_t.log_probability(y) - prompt.inst.log_probability(y)) - beta;
    }
    state.lagrange.push_back(pi_t.expect(integrand));
  }
  return {std::move(state), std::move(point)};
}

/// max over prompts and supported responses of
/// |d/dt log pi_t (central FD) - (r - beta log(pi_t/pi_inst) - beta - lambda_t(x))|.
template <typename Scalar>
Scalar flow_ode_residual(const RlvrFamily<Scalar>& family, Scalar t) {
  using std::abs;
  if (!(t > Scalar(0))) throw Error(ErrorKind::kNegativeLambda, "flow time must be > 0");
  const Scalar h = std::min(Scalar(detail::kTimeStep), t);
  const auto [state, here] = flow_solution(family, t);
  const auto later = flow_solution(family, t + h).second;
  const auto earlier = flow_solution(family, t - h).second;
  const Scalar beta = family.beta();
  Scalar worst(0);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& prompt = family.prompt(i);
    for (Eigen::Index y = 0; y < prompt.inst.size(); ++y) {
      if (!prompt.inst.supports(y)) continue;
      const Scalar fd = (later.tilted[i].log_probability(y) - earlier.tilted[i].log_probability(y)) /
                        (Scalar(2) * h);
      const Scalar rhs = prompt.reward(y) -
                         beta * (here.tilted[i].log_probability(y) - prompt.inst.log_probability(y)) -
                         beta - state.lagrange[i];
      worst = std::max(worst, abs(fd - rhs));
    }
  }
  return worst;
}

/// Delta_lambda(x) = CE(pi_reas, pi_lambda) - H(pi_lambda), per prompt.
template <typename Scalar>
std::vector<Scalar> entropy_gap(const RlvrFamily<Scalar>& family, Scalar lambda) {
  const PathPoint<Scalar> here = path_point(family, lambda);
  const PathPoint<Scalar> target = reasoning_target(family);
  std::vector<Scalar> gap;
  for (std::size_t i = 0; i < family.size(); ++i) {
    gap.push_back(cross_entropy(target.tilted[i], here.tilted[i]) - entropy(here.tilted[i]));
  }
  return gap;
}

template <typename Scalar>
struct EntropyGapApproximation {
  Scalar delta;
  std::vector<Scalar> exact;
  /// -delta Cov_{pi_lambda}(log pi_lambda, r).
  std::vector<Scalar> approx;
  std::vector<Scalar> error;
  /// sum_x p(x) |exact - approx|.
  Scalar weighted_error;
};

/// First-order (in delta = 1/beta - lambda) approximation of the gap.
/// Intended for |delta| <= 0.5.
template <typename Scalar>
EntropyGapApproximation<Scalar> entropy_gap_approx_check(const RlvrFamily<Scalar>& family,
                                                         Scalar lambda) {
  using std::abs;
  const PathPoint<Scalar> here = path_point(family, lambda);
  EntropyGapApproximation<Scalar> out;
  out.delta = here.delta;
  out.exact = entropy_gap(family, lambda);
  out.weighted_error = Scalar(0);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& pi = here.tilted[i];
    const auto& reward = family.prompt(i).reward;
    Scalar mean_log(0), mean_r(0), mean_log_r(0);
    for (Eigen::Index y = 0; y < pi.size(); ++y) {
      if (!pi.supports(y)) continue;
      const Scalar p = pi.probability(y);
      mean_log += p * pi.log_probability(y);
      mean_r += p * reward(y);
      mean_log_r += p * pi.log_probability(y) * reward(y);
    }
    const Scalar approx = -out.delta * (mean_log_r - mean_log * mean_r);
    out.approx.push_back(approx);
    out.error.push_back(abs(out.exact[i] - approx));
    out.weighted_error += family.weight(i) * out.error.back();
  }
  return out;
}

template <typename Scalar>
struct EntropyRuleScaling {
  std::vector<Scalar> deltas;
  std::vector<Scalar> errors;
  /// errors[k+1] / errors[k].
  std::vector<Scalar> ratios;
  /// errors[k+1] <= 0.35 errors[k] + 1e-12 for every successive pair.
  bool quadratic;
};

/// Halving experiment: evaluates the approximation error at lambda = 1/beta - delta
/// for each delta (expected to halve from one entry to the next).
template <typename Scalar>
EntropyRuleScaling<Scalar> entropy_rule_scaling(const RlvrFamily<Scalar>& family,
                                                const std::vector<Scalar>& deltas) {
  EntropyRuleScaling<Scalar> out;
  out.deltas = deltas;
  out.quadratic = true;
  for (Scalar delta : deltas) {
    out.errors.push_back(
        entropy_gap_approx_check(family, family.target_lambda() - delta).weighted_error);
  }
  for (std::size_t k = 1; k < out.errors.size(); ++k) {
    const Scalar prev = out.errors[k - 1];
    const Scalar next = out.errors[k];
    out.ratios.push_back(prev > Scalar(0) ? next / prev : Scalar(0));
    if (next > Scalar(tol::kHalvingRatio) * prev + Scalar(tol::kStructural)) out.quadratic = false;
  }
  return out;
}

/// E_x D(R*(x) || R_lambda(x)) - D(E_x R* || E_x R_lambda); nonnegative by
/// joint convexity.
template <typename Scalar>
Scalar jensen_aggregate_check(const RlvrFamily<Scalar>& family, Scalar lambda) {
  const PathPoint<Scalar> here = path_point(family, lambda);
  const PathPoint<Scalar> target = reasoning_target(family);
  Scalar lhs(0), mean_star(0), mean_star_c(0), mean_here(0), mean_here_c(0);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Scalar w = family.weight(i);
    const Scalar d = bernoulli_kl(target.accuracy[i], here.accuracy[i]);
    if (std::isinf(d)) {
      throw Error(ErrorKind::kBoundaryDivergence,
                  "prompt " + std::to_string(i) + " has a boundary accuracy mismatch");
    }
    lhs += w * d;
    mean_star += w * target.accuracy[i].value();
    mean_star_c += w * target.accuracy[i].complement();
    mean_here += w * here.accuracy[i].value();
    mean_here_c += w * here.accuracy[i].complement();
  }
  const Scalar rhs = bernoulli_kl(BernoulliRate<Scalar>::from_complementary(
                                      std::min(mean_star, Scalar(1)), std::min(mean_star_c, Scalar(1))),
                                  BernoulliRate<Scalar>::from_complementary(
                                      std::min(mean_here, Scalar(1)), std::min(mean_here_c, Scalar(1))));
  return lhs - rhs;
}

enum class FitStatus { kApplicable, kPremiseFailed, kDegenerate };

constexpr const char* to_string(FitStatus status) {
  switch (status) {
    case FitStatus::kApplicable: return "applicable";
    case FitStatus::kPremiseFailed: return "non-applicable (premise E_x R* = 1 fails)";
    case FitStatus::kDegenerate: return "non-applicable (degenerate trace)";
  }
  return "unknown";
}

template <typename Scalar>
struct TraceStep {
  int n;
  Scalar lambda;
  Scalar mean_accuracy;
  Scalar mean_entropy;
  Scalar mean_kl;
  Scalar jensen_margin;
};

template <typename Scalar>
struct EntropyTraceFit {
  std::vector<TraceStep<Scalar>> steps;
  /// Least squares R_n ≈ b - a exp(H_{n+1}).
  Scalar fitted_a;
  Scalar fitted_b;
  /// Root-mean-square residual of the fit.
  Scalar fit_residual;
  /// Pearson correlation of (R_n, exp(H_{n+1})); NaN when degenerate.
  Scalar correlation;
  Scalar mean_target_accuracy;
  FitStatus status;

  bool applicable() const { return status == FitStatus::kApplicable; }
};

/// Walks lambda_n = (1 - exp(-beta n))/beta for n = 0..n_steps, recording
/// mean accuracy, mean entropy, mean KL to the target and the Jensen margin,
/// then fits R_n against exp(H_{n+1}).
template <typename Scalar>
EntropyTraceFit<Scalar> entropy_accuracy_trace(
    const RlvrFamily<Scalar>& family, int n_steps,
    Scalar premise_accuracy = Scalar(tol::kTracePremiseAccuracy)) {
  using std::exp;
  using std::sqrt;
  if (n_steps < 1) throw Error(ErrorKind::kInvalidFamily, "trace needs at least one step");
  const PathPoint<Scalar> target = reasoning_target(family);

  EntropyTraceFit<Scalar> out;
  std::vector<Scalar> next_entropy_exp;
  for (int n = 0; n <= n_steps + 1; ++n) {
    const Scalar lambda = flow_schedule(family.beta(), Scalar(n));
    const PathPoint<Scalar> point = path_point(family, lambda);
    const Scalar mean_entropy = point.mean_entropy(family);
    if (n >= 1) next_entropy_exp.push_back(exp(mean_entropy));
    if (n > n_steps) break;
    Scalar mean_kl(0);
    for (std::size_t i = 0; i < family.size(); ++i) {
      mean_kl += family.weight(i) * kl_divergence(target.tilted[i], point.tilted[i]);
    }
    out.steps.push_back({n, lambda, point.mean_accuracy(family), mean_entropy, mean_kl,
                         jensen_aggregate_check(family, lambda)});
  }
  out.mean_target_accuracy = target.mean_accuracy(family);

  const auto count = static_cast<Scalar>(out.steps.size());
  Scalar mean_x(0), mean_r(0);
  for (std::size_t k = 0; k < out.steps.size(); ++k) {
    mean_x += next_entropy_exp[k];
    mean_r += out.steps[k].mean_accuracy;
  }
  mean_x /= count;
  mean_r /= count;
  Scalar sxx(0), srr(0), sxr(0);
  for (std::size_t k = 0; k < out.steps.size(); ++k) {
    const Scalar dx = next_entropy_exp[k] - mean_x;
    const Scalar dr = out.steps[k].mean_accuracy - mean_r;
    sxx += dx * dx;
    srr += dr * dr;
    sxr += dx * dr;
  }
  const Scalar tiny = Scalar(1e-24) * count;
  const bool degenerate = sxx <= tiny * std::max(Scalar(1), mean_x * mean_x) || srr <= tiny;
  const Scalar slope = degenerate ? Scalar(0) : sxr / sxx;
  out.fitted_a = -slope;
  out.fitted_b = mean_r - slope * mean_x;
  Scalar ss(0);
  for (std::size_t k = 0; k < out.steps.size(); ++k) {
    const Scalar e = out.steps[k].mean_accuracy - (out.fitted_b - out.fitted_a * next_entropy_exp[k]);
    ss += e * e;
  }
  out.fit_residual = sqrt(ss / count);
  out.correlation = degenerate ? std::numeric_limits<Scalar>::quiet_NaN() : sxr / sqrt(sxx * srr);
  if (degenerate) {
    out.status = FitStatus::kDegenerate;
  } else if (out.mean_target_accuracy < premise_accuracy) {
    out.status = FitStatus::kPremiseFailed;
  } else {
    out.status = FitStatus::kApplicable;
  }
  return out;
}

}  // namespace ebmlab
