#include "doctest.h"

#include <cmath>

#include "ebmlab/chain.hpp"
#include "ebmlab/scenarios.hpp"

using ebmlab::ChainScenario;
using ebmlab::Distribution;
using ebmlab::Error;
using ebmlab::ErrorKind;
using ebmlab::ProposalGraph;
using Dist = Distribution<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ebmlab::Error");
  return ErrorKind::kIoFailure;
}

ChainScenario<double> two_state(double beta = 1.0) {
  ChainScenario<double> s;
  s.p_data = Dist::from_probabilities(vec({2.0 / 3.0, 1.0 / 3.0}));
  s.proposal_graph = ProposalGraph::complete(2);
  s.h = vec({0.0, 1.0});
  s.beta = beta;
  return s;
}

// Reversible chain with every row equal to pi.
ebmlab::ReversibleChain<double> iid_chain(const VectorXd& pi) {
  MatrixXd k(pi.size(), pi.size());
  for (Eigen::Index f = 0; f < pi.size(); ++f) k.row(f) = pi.transpose();
  return ebmlab::chain_from_kernel(k);
}

}  // namespace

TEST_CASE("pretrained kernel examples") {
  ChainScenario<double> s;
  s.p_data = Dist::uniform(6);
  s.proposal_graph = ProposalGraph::cycle(6);
  s.h = VectorXd::Zero(6);
  const MatrixXd k = ebmlab::build_pretrained_kernel(s);
  for (Eigen::Index f = 0; f < 6; ++f) {
    CHECK(k(f, f) == 0.0);
    for (Eigen::Index g : s.proposal_graph.adjacency[f]) CHECK(k(f, g) == 0.5);
  }

  // Metropolis ratios min(1, (1/3)/(2/3)) = 1/2 and min(1, 2) = 1.
  const MatrixXd two = ebmlab::build_pretrained_kernel(two_state());
  CHECK(two(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(two(1, 0) == 1.0);
  CHECK(two(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ebmlab::pretrained_assumption_residual(two, two_state().p_data) <= 1e-12);
}

TEST_CASE("scenario validation") {
  auto s = two_state();
  s.beta = 0.0;
  CHECK(kind_of([&] { ebmlab::build_pretrained_kernel(s); }) == ErrorKind::kNonPositiveBeta);

  ChainScenario<double> split;
  split.p_data = Dist::uniform(4);
  split.proposal_graph = ProposalGraph::from_edges(4, {{0, 1}, {2, 3}});
  split.h = VectorXd::Zero(4);
  CHECK(kind_of([&] { ebmlab::build_pretrained_kernel(split); }) ==
        ErrorKind::kDisconnectedGraph);

  auto sparse = two_state();
  sparse.p_data = Dist::from_probabilities(vec({1.0, 0.0}));
  CHECK(kind_of([&] { ebmlab::build_pretrained_kernel(sparse); }) ==
        ErrorKind::kInvalidScenario);

  auto short_h = two_state();
  short_h.h = vec({1.0});
  CHECK(kind_of([&] { ebmlab::build_pretrained_kernel(short_h); }) == ErrorKind::kSizeMismatch);
}

TEST_CASE("tilt_kernel: constant h leaves the pretrained chain unchanged") {
  const auto s = ebmlab::scenarios::random_chain_scenario(5, 0, 12, 1.0);
  const MatrixXd k = ebmlab::build_pretrained_kernel(s);
  const auto chain = ebmlab::tilt_kernel(k, VectorXd::Constant(12, 3.5).eval(), 0.7);
  CHECK((chain.kernel - k).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((chain.stationary.probabilities() - s.p_data.probabilities()).cwiseAbs().maxCoeff() <=
        1e-12);
  CHECK(ebmlab::potential_round_trip_residual(chain.potential, (-s.p_data.log_weights()).eval()) <=
        1e-12);
}

TEST_CASE("tilt_kernel: two-state example") {
  const auto s = two_state();
  const auto chain = ebmlab::build_chain(s);
  CHECK(ebmlab::detailed_balance_residual(chain) <= 1e-12);
  CHECK(ebmlab::potential_form_residual(chain) <= 1e-10);
  CHECK(ebmlab::row_sum_residual(chain.kernel) <= 1e-12);

  // Recovering p_data from the kernel gives the same chain.
  const auto recovered = ebmlab::tilt_kernel(ebmlab::build_pretrained_kernel(s), s.h, s.beta);
  CHECK((recovered.kernel - chain.kernel).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(ebmlab::potential_round_trip_residual(recovered.potential, chain.potential) <= 1e-12);
}

TEST_CASE("recover_potential examples") {
  const VectorXd pi = vec({0.1, 0.2, 0.3, 0.4});
  const auto chain = iid_chain(pi);
  CHECK(ebmlab::potential_round_trip_residual(chain.potential, (-pi.array().log()).matrix().eval()) <=
        1e-12);

  // Deterministic rotation: every pair has one-sided support.
  MatrixXd rotation = MatrixXd::Zero(3, 3);
  rotation(0, 1) = rotation(1, 2) = rotation(2, 0) = 1.0;
  CHECK(kind_of([&] { ebmlab::recover_potential(rotation); }) == ErrorKind::kAsymmetricSupport);

  // Lazy 3-cycle with net circulation: symmetric support, inconsistent loop.
  MatrixXd biased(3, 3);
  biased << 0.5, 1.0 / 3.0, 1.0 / 6.0,
            1.0 / 6.0, 0.5, 1.0 / 3.0,
            1.0 / 3.0, 1.0 / 6.0, 0.5;
  CHECK(kind_of([&] { ebmlab::recover_potential(biased); }) == ErrorKind::kCycleInconsistency);
  CHECK(kind_of([&] { ebmlab::chain_from_kernel(biased); }) == ErrorKind::kCycleInconsistency);

  MatrixXd blocks = MatrixXd::Zero(4, 4);
  blocks.topLeftCorner(2, 2).setConstant(0.5);
  blocks.bottomRightCorner(2, 2).setConstant(0.5);
  CHECK(kind_of([&] { ebmlab::recover_potential(blocks); }) == ErrorKind::kDisconnectedGraph);
}

TEST_CASE("stationary_from_potential examples") {
  const Dist flat = ebmlab::stationary_from_potential(VectorXd::Constant(5, 2.0).eval());
  CHECK((flat.probabilities().array() - 0.2).abs().maxCoeff() <= 1e-15);

  const Dist two = ebmlab::stationary_from_potential(vec({0.0, std::log(2.0)}));
  CHECK(two.probability(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(two.probability(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const VectorXd v = vec({0.3, -1.2, 2.0});
  const Dist a = ebmlab::stationary_from_potential(v);
  const Dist b = ebmlab::stationary_from_potential((v.array() + 17.0).matrix().eval());
  CHECK((a.probabilities() - b.probabilities()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("evolve examples") {
  const auto chain = ebmlab::build_chain(ebmlab::scenarios::random_chain_scenario(3, 1, 10, 0.8));
  const auto still = ebmlab::evolve(chain, chain.stationary, 20);
  CHECK(still.snapshots.size() == 21);
  for (double kl : still.kl_trace) CHECK(kl <= 1e-14);

  const auto mixer = iid_chain(vec({0.5, 0.5}));
  const auto tr = ebmlab::evolve(mixer, Dist::point_mass(2, 0), 5);
  CHECK(tr.kl_trace[0] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  for (std::size_t t = 1; t < tr.kl_trace.size(); ++t) CHECK(tr.kl_trace[t] <= 1e-15);

  CHECK(kind_of([&] { ebmlab::evolve(chain, Dist::uniform(3), 5); }) == ErrorKind::kSizeMismatch);
}

TEST_CASE("drift examples") {
  const auto flat = iid_chain(vec({0.25, 0.25, 0.25, 0.25}));
  for (Eigen::Index f = 0; f < 4; ++f) CHECK(std::abs(ebmlab::drift(flat, f)) <= 1e-15);

  const VectorXd pi = vec({0.1, 0.2, 0.3, 0.4});
  const auto iid = iid_chain(pi);
  const double mean_v = iid.stationary.expect(iid.potential);
  for (Eigen::Index f = 0; f < 4; ++f) {
    CHECK(ebmlab::drift(iid, f) == doctest::Approx(mean_v - iid.potential(f)).epsilon(1e-13));
  }
}

TEST_CASE("expected hitting times examples") {
  MatrixXd k(2, 2);
  k << 0.75, 0.25, 0.5, 0.5;
  const auto chain = ebmlab::chain_from_kernel(k);
  const VectorXd times = ebmlab::expected_hitting_times(chain, {1});
  CHECK(times(1) == 0.0);
  CHECK(times(0) == doctest::Approx(4.0).epsilon(1e-14));

  CHECK(kind_of([&] { ebmlab::expected_hitting_times(chain, {}); }) == ErrorKind::kEmptyTargetSet);

  // Absorbing state outside the target: the system is singular.
  MatrixXd absorbing(3, 3);
  absorbing << 1.0, 0.0, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.5;
  ebmlab::ReversibleChain<double> raw;
  raw.kernel = absorbing;
  raw.potential = VectorXd::Zero(3);
  raw.stationary = Dist::uniform(3);
  CHECK(kind_of([&] { ebmlab::expected_hitting_times(raw, {2}); }) == ErrorKind::kSingularSystem);
}

TEST_CASE("hitting bound: trivial and vacuous paths") {
  const auto chain = ebmlab::build_chain(ebmlab::scenarios::random_chain_scenario(9, 4, 8, 1.0));
  const auto everything = ebmlab::hitting_bound_check(chain, chain.potential.maxCoeff());
  CHECK(everything.target_set.size() == 8);
  CHECK(everything.expected_times.cwiseAbs().maxCoeff() == 0.0);
  CHECK(everything.bound_holds);

  CHECK(kind_of([&] { ebmlab::hitting_bound_check(chain, chain.potential.minCoeff() - 1.0); }) ==
        ErrorKind::kEmptyTargetSet);

  // A chain whose drift is positive somewhere outside B.
  bool saw_vacuous = false;
  for (std::uint64_t i = 0; i < 50 && !saw_vacuous; ++i) {
    const auto c = ebmlab::build_chain(ebmlab::scenarios::random_chain_scenario(11, i, 8, 1.0));
    const auto a = ebmlab::hitting_bound_check(c, c.potential.minCoeff());
    if (!a.condition_holds) {
      saw_vacuous = true;
      CHECK(a.bound_holds);
      CHECK(std::isnan(a.worst_margin));
    }
  }
  CHECK(saw_vacuous);
}

TEST_CASE("hitting bound on drift-compliant birth-death chains") {
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto chain =
        ebmlab::build_chain(ebmlab::scenarios::birth_death_scenario(2024, i, 16, 1.5));
    const double lo = chain.potential.minCoeff();
    const double hi = chain.potential.maxCoeff();
    const auto a = ebmlab::hitting_bound_check(chain, lo + 0.25 * (hi - lo));
    CHECK(a.condition_holds);
    CHECK(a.bound_holds);
    CHECK(a.worst_margin >= -1e-9);
  }
}

TEST_CASE("Monte Carlo agrees with the linear solve") {
  const auto chain = ebmlab::build_chain(ebmlab::scenarios::random_chain_scenario(31, 2, 8, 1.0));
  Eigen::Index lowest = 0;
  chain.potential.minCoeff(&lowest);
  const VectorXd times = ebmlab::expected_hitting_times(chain, {lowest});
  const Eigen::Index start = (lowest + 4) % 8;
  const auto mc = ebmlab::estimate_hitting_time(chain, {lowest}, start, 20000, 99);
  CHECK(std::abs(mc.mean - times(start)) <= 4.0 * mc.standard_error);

  const auto again = ebmlab::estimate_hitting_time(chain, {lowest}, start, 20000, 99);
  CHECK(again.mean == mc.mean);
}

TEST_CASE("property: reversible-chain invariants on random scenarios") {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto s = ebmlab::scenarios::property_chain_scenario(404, i);
    const MatrixXd pretrained = ebmlab::build_pretrained_kernel(s);
    const auto chain = ebmlab::build_chain(s);
    CHECK(ebmlab::pretrained_assumption_residual(pretrained, s.p_data) <= 1e-12);
    CHECK(ebmlab::row_sum_residual(chain.kernel) <= 1e-12);
    CHECK(ebmlab::detailed_balance_residual(chain) <= 1e-12);
    CHECK(ebmlab::potential_form_residual(chain) <= 1e-10);
    CHECK(ebmlab::stationarity_residual(chain) <= 1e-12);
    CHECK(ebmlab::potential_round_trip_residual(ebmlab::recover_potential(chain.kernel),
                                                chain.potential) <= 1e-9);
    CHECK(std::abs(ebmlab::mean_drift(chain)) <= 1e-12);

    const auto p0 = ebmlab::scenarios::random_start(405, i, chain.size());
    CHECK(ebmlab::worst_kl_increase(ebmlab::evolve(chain, p0, 200)) <= 1e-12);
  }
}

TEST_CASE("property: relabeling states relabels the chain") {
  const auto s = ebmlab::scenarios::random_chain_scenario(8, 0, 9, 1.2);
  const auto chain = ebmlab::build_chain(s);
  std::vector<Eigen::Index> perm = {3, 1, 4, 0, 5, 8, 2, 6, 7};
  MatrixXd permuted(9, 9);
  for (Eigen::Index a = 0; a < 9; ++a)
    for (Eigen::Index b = 0; b < 9; ++b) permuted(a, b) = chain.kernel(perm[a], perm[b]);
  const auto relabeled = ebmlab::chain_from_kernel(permuted);
  for (Eigen::Index a = 0; a < 9; ++a) {
    CHECK(relabeled.stationary.probability(a) ==
          doctest::Approx(chain.stationary.probability(perm[a])).epsilon(1e-12));
  }
}
