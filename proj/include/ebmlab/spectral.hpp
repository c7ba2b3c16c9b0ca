#pragma once

// Spectral analysis of reversible chains in L2(pi): the symmetrized operator
// S = D^{1/2} T D^{-1/2}, a cyclic Jacobi eigensolver, the geometric envelope
// on |L(t) - L_inf| and the Poincare inequality.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "ebmlab/chain.hpp"

namespace ebmlab {

template <typename Scalar>
struct EigenDecomposition {
  /// Descending; ties keep the original diagonal order.
  Vector<Scalar> values;
  /// Orthonormal eigenvectors as columns, aligned with `values`.
  Matrix<Scalar> vectors;
  int sweeps = 0;
};

template <typename Scalar>
struct SpectralReport {
  Vector<Scalar> eigenvalues_mu;
  Scalar lambda2;
  Scalar rho;
  Scalar variance_V;
  Scalar dirichlet_V;
  Scalar chi0;

  /// The envelope rate uses rho; chains with negative eigenvalues have
  /// rho > 1 - lambda2. Both are reported.
  Scalar one_minus_lambda2() const { return Scalar(1) - lambda2; }
};

template <typename Scalar>
struct EnvelopeCheck {
  std::vector<Scalar> deviation;
  std::vector<Scalar> bound;
  std::vector<Scalar> margin;
  bool holds;
  Scalar worst_margin;
};

/// S(f,g) = sqrt(pi(f)/pi(g)) T(g|f). Returns the exactly symmetric part
/// after verifying the asymmetry is within tolerance.
template <typename Scalar>
Matrix<Scalar> symmetrize(const ReversibleChain<Scalar>& chain) {
  using std::sqrt;
  if (!chain.stationary.strictly_positive()) {
    throw Error(ErrorKind::kZeroStationaryMass, "stationary distribution must be positive");
  }
  const Vector<Scalar> root_pi = chain.stationary.probabilities().array().sqrt().matrix();
  const Matrix<Scalar> s =
      root_pi.asDiagonal() * chain.kernel * root_pi.cwiseInverse().asDiagonal();
  const Scalar asymmetry = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > Scalar(tol::kIterative)) {
    throw Error(ErrorKind::kNotReversible,
                "symmetrized kernel asymmetry " + std::to_string(asymmetry),
                static_cast<double>(asymmetry));
  }
  return (s + s.transpose()) / Scalar(2);
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
/// 1e-12 * max(1, ||S||_F).
template <typename Scalar>
EigenDecomposition<Scalar> eigen_decompose(const Matrix<Scalar>& symmetric) {
  using std::abs;
  using std::sqrt;
  if (symmetric.rows() != symmetric.cols() || symmetric.rows() == 0) {
    throw Error(ErrorKind::kSizeMismatch, "eigen_decompose needs a nonempty square matrix");
  }
  const Scalar asymmetry = (symmetric - symmetric.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > Scalar(tol::kIterative)) {
    throw Error(ErrorKind::kNotReversible, "matrix is not symmetric",
                static_cast<double>(asymmetry));
  }
  const Eigen::Index n = symmetric.rows();
  Matrix<Scalar> a = (symmetric + symmetric.transpose()) / Scalar(2);
  Matrix<Scalar> q = Matrix<Scalar>::Identity(n, n);
  const Scalar threshold =
      Scalar(tol::kJacobiOffDiagonal) * std::max(Scalar(1), a.norm());

  auto off_norm = [&]() {
    Scalar acc(0);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) acc += a(i, j) * a(i, j);
    return sqrt(acc);
  };

  int sweeps = 0;
  while (off_norm() >= threshold) {
    if (sweeps == tol::kJacobiMaxSweeps) {
      throw Error(ErrorKind::kNoConvergence, "Jacobi sweep budget exhausted",
                  static_cast<double>(off_norm()));
    }
    ++sweeps;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index r = p + 1; r < n; ++r) {
        const Scalar apr = a(p, r);
        if (apr == Scalar(0)) continue;
        const Scalar theta = (a(r, r) - a(p, p)) / (Scalar(2) * apr);
        const Scalar t = abs(theta) > Scalar(1e150)
                             ? Scalar(1) / (Scalar(2) * theta)
                             : (theta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                                   (abs(theta) + sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          if (k == p || k == r) continue;
          const Scalar akp = a(k, p);
          const Scalar akr = a(k, r);
          a(k, p) = a(p, k) = c * akp - s * akr;
          a(k, r) = a(r, k) = s * akp + c * akr;
        }
        a(p, p) -= t * apr;
        a(r, r) += t * apr;
        a(p, r) = a(r, p) = Scalar(0);
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar qkp = q(k, p);
          const Scalar qkr = q(k, r);
          q(k, p) = c * qkp - s * qkr;
          q(k, r) = s * qkp + c * qkr;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  EigenDecomposition<Scalar> out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = q.col(order[i]);
  }
  out.sweeps = sweeps;
  return out;
}

/// ||S - Q diag(values) Q^T||_max.
template <typename Scalar>
Scalar reconstruction_residual(const Matrix<Scalar>& symmetric,
                               const EigenDecomposition<Scalar>& decomposition) {
  const Matrix<Scalar> rebuilt = decomposition.vectors * decomposition.values.asDiagonal() *
                                 decomposition.vectors.transpose();
  return (symmetric - rebuilt).cwiseAbs().maxCoeff();
}

template <typename Scalar>
Scalar variance(const Distribution<Scalar>& pi, const Vector<Scalar>& f) {
  const Scalar mean = pi.expect(f);
  return pi.expect((f.array() - mean).square().matrix());
}

/// E(f,f) = 1/2 sum_s pi(s) sum_s' T(s'|s) (f(s) - f(s'))^2.
template <typename Scalar>
Scalar dirichlet_form(const ReversibleChain<Scalar>& chain, const Vector<Scalar>& f) {
  Vector<Scalar> local(chain.size());
  for (Eigen::Index s = 0; s < chain.size(); ++s) {
    Scalar acc(0);
    for (Eigen::Index t = 0; t < chain.size(); ++t) {
      const Scalar d = f(s) - f(t);
      acc += chain.kernel(s, t) * d * d;
    }
    local(s) = acc;
  }
  return Scalar(0.5) * chain.stationary.expect(local);
}

/// Eigenfunction of the transition operator on L2(pi) for eigenvector `index`
/// of S: u = D^{-1/2} q, normalized so that ||u||_{L2(pi)} = 1.
template <typename Scalar>
Vector<Scalar> l2_eigenfunction(const ReversibleChain<Scalar>& chain,
                                const EigenDecomposition<Scalar>& decomposition,
                                Eigen::Index index) {
  const Vector<Scalar> root_pi = chain.stationary.probabilities().array().sqrt().matrix();
  return decomposition.vectors.col(index).cwiseQuotient(root_pi);
}

template <typename Scalar>
SpectralReport<Scalar> spectral_report(const ReversibleChain<Scalar>& chain,
                                       const Distribution<Scalar>& p0) {
  using std::abs;
  if (chain.size() < 2) {
    throw Error(ErrorKind::kInvalidScenario, "spectral report needs at least two states");
  }
  const EigenDecomposition<Scalar> eig = eigen_decompose(symmetrize(chain));
  SpectralReport<Scalar> report;
  report.eigenvalues_mu = eig.values;
  report.lambda2 = Scalar(1) - eig.values(1);
  Scalar rho(0);
  for (Eigen::Index i = 1; i < eig.values.size(); ++i) rho = std::max(rho, abs(eig.values(i)));
  report.rho = std::min(rho, Scalar(1));
  report.variance_V = variance(chain.stationary, chain.potential);
  report.dirichlet_V = dirichlet_form(chain, chain.potential);
  report.chi0 = chi_square_distance(p0, chain.stationary);
  return report;
}

/// |L(t) - L_inf| <= rho^t sqrt(Var_pi(V)) chi(P0 || pi) + 1e-9 for t <= t_max.
template <typename Scalar>
EnvelopeCheck<Scalar> convergence_bound_check(const ReversibleChain<Scalar>& chain,
                                              const Distribution<Scalar>& p0, int t_max) {
  using std::abs;
  using std::pow;
  using std::sqrt;
  const SpectralReport<Scalar> report = spectral_report(chain, p0);
  const Trajectory<Scalar> trajectory = evolve(chain, p0, t_max);
  const Scalar limit = chain.stationary.expect(chain.potential);
  const Vector<Scalar> centered = (chain.potential.array() - limit).matrix();
  const Scalar scale = sqrt(report.variance_V) * report.chi0;

  EnvelopeCheck<Scalar> out;
  out.holds = true;
  out.worst_margin = std::numeric_limits<Scalar>::infinity();
  Scalar envelope(1);
  for (int t = 0; t <= t_max; ++t) {
    const Scalar deviation = abs(trajectory.snapshots[t].expect(centered));
    const Scalar bound = envelope * scale;
    out.deviation.push_back(deviation);
    out.bound.push_back(bound);
    out.margin.push_back(bound - deviation);
    out.worst_margin = std::min(out.worst_margin, bound - deviation);
    if (deviation > bound + Scalar(tol::kBoundSlack)) out.holds = false;
    envelope *= report.rho;
  }
  return out;
}

/// E(f,f)/lambda2 - Var_pi(f) for an arbitrary state function f.
template <typename Scalar>
Scalar poincare_margin(const ReversibleChain<Scalar>& chain, const Vector<Scalar>& f,
                       Scalar lambda2) {
  if (!(lambda2 > Scalar(tol::kDegenerateGap))) {
    throw Error(ErrorKind::kDegenerateGap,
                "spectral gap " + std::to_string(lambda2) + " is too small",
                static_cast<double>(lambda2));
  }
  return dirichlet_form(chain, f) / lambda2 - variance(chain.stationary, f);
}

/// Poincare margin for the chain's own potential; >= -1e-9 when the
/// inequality holds.
template <typename Scalar>
Scalar poincare_check(const ReversibleChain<Scalar>& chain) {
  const EigenDecomposition<Scalar> eig = eigen_decompose(symmetrize(chain));
  if (eig.values.size() < 2) {
    throw Error(ErrorKind::kDegenerateGap, "single-state chain has no spectral gap");
  }
  return poincare_margin(chain, chain.potential, Scalar(1) - eig.values(1));
}

}  // namespace ebmlab
