#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ebmlab/error.hpp"
#include "ebmlab/tolerances.hpp"

namespace ebmlab {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
constexpr Scalar minus_infinity() {
  return -std::numeric_limits<Scalar>::infinity();
}

/// log(sum(exp(x))) with max subtraction. Entries equal to -inf contribute
/// nothing; an all -inf input yields -inf.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  using std::exp;
  using std::log;
  if (x.size() == 0) return minus_infinity<Scalar>();
  const Scalar peak = x.maxCoeff();
  if (peak == minus_infinity<Scalar>()) return peak;
  Scalar acc(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += exp(x(i) - peak);
  return peak + log(acc);
}

/// Probability vector over a finite label set, stored as natural-log
/// probabilities. Zero-probability states hold exactly -inf.
template <typename Scalar>
class Distribution {
 public:
  using VectorType = Vector<Scalar>;

  Distribution() = default;

  /// Normalizes arbitrary (finite or -inf) log weights.
  template <typename Derived>
  static Distribution from_log_weights(const Eigen::MatrixBase<Derived>& log_weights) {
    if (log_weights.size() == 0) {
      throw Error(ErrorKind::kInvalidDistribution, "empty log-weight vector");
    }
    for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
      const Scalar w = log_weights(i);
      if (std::isnan(w) || w == std::numeric_limits<Scalar>::infinity()) {
        throw Error(ErrorKind::kInvalidDistribution,
                    "log weight " + std::to_string(i) + " is NaN or +inf");
      }
    }
    const Scalar log_total = log_sum_exp(log_weights);
    if (log_total == minus_infinity<Scalar>()) {
      throw Error(ErrorKind::kInvalidDistribution, "all weights are zero");
    }
    Distribution d;
    d.log_weights_ = log_weights.derived().template cast<Scalar>();
    for (Eigen::Index i = 0; i < d.log_weights_.size(); ++i) {
      if (d.log_weights_(i) != minus_infinity<Scalar>()) d.log_weights_(i) -= log_total;
    }
    return d;
  }

  /// Normalizes nonnegative weights; exact zeros become -inf.
  template <typename Derived>
  static Distribution from_probabilities(const Eigen::MatrixBase<Derived>& weights) {
    using std::log;
    if (weights.size() == 0) {
      throw Error(ErrorKind::kInvalidDistribution, "empty weight vector");
    }
    Scalar total(0);
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      const Scalar w = weights(i);
      if (!(w >= Scalar(0)) || !std::isfinite(w)) {
        throw Error(ErrorKind::kInvalidDistribution,
                    "weight " + std::to_string(i) + " is negative or not finite");
      }
      total += w;
    }
    if (!(total > Scalar(0))) {
      throw Error(ErrorKind::kInvalidDistribution, "all weights are zero");
    }
    Distribution d;
    d.log_weights_.resize(weights.size());
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      const Scalar w = weights(i);
      d.log_weights_(i) = w > Scalar(0) ? log(w / total) : minus_infinity<Scalar>();
    }
    return d;
  }

  static Distribution uniform(Eigen::Index n) {
    return from_log_weights(VectorType::Zero(n));
  }

  static Distribution point_mass(Eigen::Index n, Eigen::Index state) {
    if (state < 0 || state >= n) {
      throw Error(ErrorKind::kInvalidDistribution, "point mass outside label set");
    }
    VectorType lw = VectorType::Constant(n, minus_infinity<Scalar>());
    lw(state) = Scalar(0);
    Distribution d;
    d.log_weights_ = std::move(lw);
    return d;
  }

  Eigen::Index size() const { return log_weights_.size(); }
  const VectorType& log_weights() const { return log_weights_; }
  Scalar log_probability(Eigen::Index i) const { return log_weights_(i); }
  Scalar probability(Eigen::Index i) const {
    using std::exp;
    return exp(log_weights_(i));
  }
  bool supports(Eigen::Index i) const { return log_weights_(i) != minus_infinity<Scalar>(); }

  VectorType probabilities() const { return log_weights_.array().exp().matrix(); }

  bool strictly_positive() const {
    for (Eigen::Index i = 0; i < size(); ++i) {
      if (!supports(i)) return false;
    }
    return true;
  }

  /// Expectation of a state function.
  template <typename Derived>
  Scalar expect(const Eigen::MatrixBase<Derived>& values) const {
    using std::exp;
    Scalar acc(0);
    for (Eigen::Index i = 0; i < size(); ++i) {
      if (supports(i)) acc += exp(log_weights_(i)) * values(i);
    }
    return acc;
  }

  /// Applies a label permutation: result(i) = this(perm[i]).
  Distribution permuted(const std::vector<Eigen::Index>& perm) const {
    Distribution d;
    d.log_weights_.resize(size());
    for (Eigen::Index i = 0; i < size(); ++i) d.log_weights_(i) = log_weights_(perm[i]);
    return d;
  }

 private:
  VectorType log_weights_;
};

/// Success probability of a Bernoulli variable. The complement is kept
/// separately so rates close to 1 keep full relative precision in 1 - value.
template <typename Scalar>
class BernoulliRate {
 public:
  BernoulliRate() = default;
  explicit BernoulliRate(Scalar value) : BernoulliRate(value, Scalar(1) - value) {}

  static BernoulliRate from_complementary(Scalar value, Scalar complement) {
    return BernoulliRate(value, complement);
  }

  Scalar value() const { return value_; }
  Scalar complement() const { return complement_; }

 private:
  BernoulliRate(Scalar value, Scalar complement) : value_(value), complement_(complement) {
    if (!(value >= Scalar(0) && value <= Scalar(1)) ||
        !(complement >= Scalar(0) && complement <= Scalar(1))) {
      throw Error(ErrorKind::kInvalidDistribution, "Bernoulli rate outside [0,1]");
    }
  }

  Scalar value_{0};
  Scalar complement_{1};
};

namespace detail {

template <typename Scalar>
void require_same_size(const Distribution<Scalar>& p, const Distribution<Scalar>& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorKind::kSizeMismatch, "distributions of size " + std::to_string(p.size()) +
                                              " and " + std::to_string(q.size()));
  }
}

}  // namespace detail

/// KL(p || q) = sum p log(p/q), 0 log 0 = 0.
template <typename Scalar>
Scalar kl_divergence(const Distribution<Scalar>& p, const Distribution<Scalar>& q) {
  using std::exp;
  detail::require_same_size(p, q);
  Scalar acc(0);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!p.supports(i)) continue;
    if (!q.supports(i)) {
      throw Error(ErrorKind::kSupportViolation,
                  "p has mass on state " + std::to_string(i) + " where q has none");
    }
    acc += exp(p.log_probability(i)) * (p.log_probability(i) - q.log_probability(i));
  }
  return std::max(acc, Scalar(0));
}

template <typename Scalar>
Scalar entropy(const Distribution<Scalar>& p) {
  using std::exp;
  Scalar acc(0);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p.supports(i)) acc -= exp(p.log_probability(i)) * p.log_probability(i);
  }
  return std::max(acc, Scalar(0));
}

/// CE(p, q) = -sum p log q.
template <typename Scalar>
Scalar cross_entropy(const Distribution<Scalar>& p, const Distribution<Scalar>& q) {
  using std::exp;
  detail::require_same_size(p, q);
  Scalar acc(0);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!p.supports(i)) continue;
    if (!q.supports(i)) {
      throw Error(ErrorKind::kSupportViolation,
                  "p has mass on state " + std::to_string(i) + " where q has none");
    }
    acc -= exp(p.log_probability(i)) * q.log_probability(i);
  }
  return acc;
}

/// D(a || b) for Bernoulli rates. Returns +inf (the BoundaryDivergence tag)
/// when a puts mass on an outcome b excludes; callers that cannot absorb an
/// infinite value raise ErrorKind::kBoundaryDivergence themselves.
template <typename Scalar>
Scalar bernoulli_kl(const BernoulliRate<Scalar>& a, const BernoulliRate<Scalar>& b) {
  using std::log;
  using std::log1p;
  // log x, taken through log1p(-(1 - x)) when the other side is the small one.
  auto log_of = [](Scalar x, Scalar other) { return other < Scalar(0.5) ? log1p(-other) : log(x); };
  auto term = [&](Scalar x, Scalar x_other, Scalar y, Scalar y_other) {
    if (x == Scalar(0)) return Scalar(0);
    if (y == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    return x * (log_of(x, x_other) - log_of(y, y_other));
  };
  const Scalar value = term(a.value(), a.complement(), b.value(), b.complement()) +
                       term(a.complement(), a.value(), b.complement(), b.value());
  return std::max(value, Scalar(0));
}

template <typename Scalar>
Scalar bernoulli_kl(Scalar a, Scalar b) {
  return bernoulli_kl(BernoulliRate<Scalar>(a), BernoulliRate<Scalar>(b));
}

/// chi(p0 || pi) = ||p0/pi - 1||_{L2(pi)}.
template <typename Scalar>
Scalar chi_square_distance(const Distribution<Scalar>& p0, const Distribution<Scalar>& pi) {
  using std::sqrt;
  detail::require_same_size(p0, pi);
  Scalar acc(0);
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    if (!pi.supports(i)) {
      throw Error(ErrorKind::kZeroStationaryMass,
                  "stationary distribution has no mass on state " + std::to_string(i));
    }
    const Scalar diff = p0.probability(i) - pi.probability(i);
    acc += diff * diff / pi.probability(i);
  }
  return sqrt(acc);
}

template <typename Scalar>
Scalar total_variation(const Distribution<Scalar>& p, const Distribution<Scalar>& q) {
  detail::require_same_size(p, q);
  return Scalar(0.5) * (p.probabilities() - q.probabilities()).cwiseAbs().sum();
}

}  // namespace ebmlab
