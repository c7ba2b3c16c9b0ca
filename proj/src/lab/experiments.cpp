#include "ebmlab/lab/experiments.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "ebmlab/chain.hpp"
#include "ebmlab/rlvr.hpp"
#include "ebmlab/scenarios.hpp"
#include "ebmlab/spectral.hpp"
#include "ebmlab/tolerances.hpp"

namespace ebmlab::lab {

namespace {

using Index = Eigen::Index;
using I64 = std::int64_t;

constexpr std::uint64_t kStartStream = 0x57A27;
constexpr std::uint64_t kMonteCarloStream = 0x3C;
constexpr std::uint64_t kPolicyStream = 0x9011C7;
constexpr std::size_t kMonteCarloInstances = 10;

// Largest value, with NaN treated as worst.
double worse(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::quiet_NaN();
  return std::max(a, b);
}

double worse_margin(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::quiet_NaN();
  return std::min(a, b);
}

CheckResult at_most(std::string name, double worst, double tolerance, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.worst = worst;
  c.tolerance = tolerance;
  c.passed = worst <= tolerance;
  c.failure = c.passed ? Failure::kNone : Failure::kInvariant;
  c.detail = std::move(detail);
  return c;
}

CheckResult at_least(std::string name, double worst, double floor, std::string detail = {}) {
  CheckResult c = at_most(std::move(name), worst, floor, std::move(detail));
  c.passed = worst >= floor;
  c.failure = c.passed ? Failure::kNone : Failure::kInvariant;
  return c;
}

CheckResult flag(std::string name, bool passed, std::string detail) {
  CheckResult c;
  c.name = std::move(name);
  c.worst = passed ? 0.0 : 1.0;
  c.passed = passed;
  c.failure = passed ? Failure::kNone : Failure::kInvariant;
  c.detail = std::move(detail);
  return c;
}

std::string prefixed(Experiment e, const char* check) {
  return std::string(to_string(e)) + "/" + check;
}

std::size_t scenario_count(const ExperimentConfig& c) {
  return static_cast<std::size_t>(c.n_scenarios);
}

// --------------------------------------------------------------------- chain

ChainScenario<double> chain_scenario(const ExperimentConfig& c, std::size_t i) {
  return scenarios::random_chain_scenario(c.seed, i, c.n_states, c.beta);
}

Distribution<double> chain_start(const ExperimentConfig& c, std::size_t i) {
  return scenarios::random_start(derive_seed(c.seed, kStartStream), i, c.n_states);
}

ExperimentOutput verify_db(const ExperimentConfig& c, int workers) {
  struct Row {
    double db, form, round_trip, assumption, stationarity, row_sum, drift;
  };
  const auto rows = parallel_map(scenario_count(c), workers, [&](std::size_t i) {
    const auto s = chain_scenario(c, i);
    const Matrix<double> pretrained = build_pretrained_kernel(s);
    const auto chain = tilt_kernel(pretrained, s.p_data.log_weights(), s.h, s.beta);
    return Row{detailed_balance_residual(chain),
               potential_form_residual(chain),
               potential_round_trip_residual(recover_potential(chain.kernel), chain.potential),
               pretrained_assumption_residual(pretrained, s.p_data),
               stationarity_residual(chain),
               row_sum_residual(chain.kernel),
               mean_drift(chain)};
  });

  ExperimentOutput out;
  Table table;
  table.header = {"scenario",     "n_states",             "beta",
                  "detailed_balance", "potential_form",   "potential_round_trip",
                  "pretrained_assumption", "stationarity", "row_sum",
                  "mean_drift"};
  double db = 0, form = 0, rt = 0, as = 0, st = 0, rs = 0, md = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    table.add_row({I64(i), I64(c.n_states), c.beta, r.db, r.form, r.round_trip, r.assumption,
                   r.stationarity, r.row_sum, r.drift});
    db = worse(db, r.db);
    form = worse(form, r.form);
    rt = worse(rt, r.round_trip);
    as = worse(as, r.assumption);
    st = worse(st, r.stationarity);
    rs = worse(rs, r.row_sum);
    md = worse(md, std::abs(r.drift));
  }
  out.tables.push_back({"verify-db.csv", std::move(table)});
  const auto e = Experiment::kVerifyDb;
  out.checks.push_back(at_most(prefixed(e, "detailed-balance"), db, tol::kStructural));
  out.checks.push_back(at_most(prefixed(e, "potential-form"), form, tol::kIterative));
  out.checks.push_back(at_most(prefixed(e, "potential-round-trip"), rt, tol::kPotential));
  out.checks.push_back(at_most(prefixed(e, "pretrained-assumption"), as, tol::kStructural));
  out.checks.push_back(at_most(prefixed(e, "stationarity"), st, tol::kStructural));
  out.checks.push_back(at_most(prefixed(e, "row-sums"), rs, tol::kStructural));
  out.checks.push_back(at_most(prefixed(e, "zero-mean-drift"), md, tol::kStructural));
  return out;
}

ExperimentOutput evolve_experiment(const ExperimentConfig& c, int workers) {
  struct Run {
    Trajectory<double> trajectory;
    double worst_increase;
  };
  const auto runs = parallel_map(scenario_count(c), workers, [&](std::size_t i) {
    const auto chain = build_chain(chain_scenario(c, i));
    auto trajectory = evolve(chain, chain_start(c, i), c.steps);
    const double increase = worst_kl_increase(trajectory);
    // Only the first trajectory is written out; drop the snapshots of the rest.
    if (i != 0) trajectory.snapshots.clear();
    return Run{std::move(trajectory), increase};
  });

  ExperimentOutput out;
  Table table;
  table.header = {"t", "kl", "expected_potential"};
  const auto& first = runs.front().trajectory;
  for (std::size_t t = 0; t < first.kl_trace.size(); ++t) {
    table.add_row({I64(t), first.kl_trace[t], first.expected_potential_trace[t]});
  }
  out.tables.push_back({"evolve.csv", std::move(table)});

  Table summary;
  summary.header = {"scenario", "kl_initial", "kl_final", "worst_kl_increase"};
  double worst = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& tr = runs[i].trajectory;
    summary.add_row({I64(i), tr.kl_trace.front(), tr.kl_trace.back(), runs[i].worst_increase});
    worst = worse(worst, runs[i].worst_increase);
  }
  out.tables.push_back({"evolve-summary.csv", std::move(summary)});
  out.checks.push_back(at_most(prefixed(Experiment::kEvolve, "kl-monotone"), worst,
                               tol::kStructural, "largest one-step KL increase"));
  return out;
}

ExperimentOutput hitting_experiment(const ExperimentConfig& c, int workers) {
  struct Instance {
    ReversibleChain<double> chain;
    HittingAnalysis<double> analysis;
    Vector<double> drifts;
  };
  const auto instances = parallel_map(scenario_count(c), workers, [&](std::size_t i) {
    auto chain = build_chain(scenarios::birth_death_scenario(c.seed, i, c.n_states, c.beta));
    const double lo = chain.potential.minCoeff();
    const double hi = chain.potential.maxCoeff();
    const double offset = c.threshold_b ? *c.threshold_b : 0.25 * (hi - lo);
    auto analysis = hitting_bound_check(chain, lo + offset);
    Vector<double> drifts = drift_vector(chain);
    return Instance{std::move(chain), std::move(analysis), std::move(drifts)};
  });

  ExperimentOutput out;
  Table table;
  table.header = {"scenario", "state", "potential", "in_target", "expected_time", "bound", "drift"};
  bool condition = true;
  bool bound = true;
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const auto& a = inst.analysis;
    for (Index s = 0; s < inst.chain.size(); ++s) {
      const bool in_target = inst.chain.potential(s) <= a.threshold_b;
      table.add_row({I64(i), I64(s), inst.chain.potential(s), I64(in_target ? 1 : 0),
                     a.expected_times(s), a.bound_values(s), inst.drifts(s)});
    }
    condition = condition && a.condition_holds;
    bound = bound && a.bound_holds;
    if (a.condition_holds) margin = worse_margin(margin, a.worst_margin);
  }
  out.tables.push_back({"hitting.csv", std::move(table)});

  // Monte Carlo cross-check from the highest-potential state.
  const std::size_t mc_count = std::min(kMonteCarloInstances, instances.size());
  struct McRow {
    Index start;
    double exact;
    HittingTimeEstimate estimate;
  };
  const auto mc = parallel_map(mc_count, workers, [&](std::size_t i) {
    const auto& inst = instances[i];
    Index start = 0;
    inst.chain.potential.maxCoeff(&start);
    const auto estimate = estimate_hitting_time(inst.chain, inst.analysis.target_set, start,
                                                c.mc_replicas,
                                                derive_seed(derive_seed(c.seed, kMonteCarloStream), i));
    return McRow{start, inst.analysis.expected_times(start), estimate};
  });
  Table mc_table;
  mc_table.header = {"scenario", "start", "exact", "mc_mean", "mc_standard_error", "z"};
  double worst_z = 0;
  for (std::size_t i = 0; i < mc.size(); ++i) {
    const auto& r = mc[i];
    const double z = r.estimate.standard_error > 0
                         ? std::abs(r.estimate.mean - r.exact) / r.estimate.standard_error
                         : (r.estimate.mean == r.exact ? 0.0 : std::numeric_limits<double>::infinity());
    mc_table.add_row({I64(i), I64(r.start), r.exact, r.estimate.mean, r.estimate.standard_error, z});
    worst_z = worse(worst_z, z);
  }
  out.tables.push_back({"hitting-mc.csv", std::move(mc_table)});

  const auto e = Experiment::kHitting;
  out.checks.push_back(flag(prefixed(e, "drift-condition"), condition,
                            "gamma > 0 on every instance"));
  CheckResult b = at_least(prefixed(e, "bound"), std::isinf(margin) ? 0.0 : margin,
                           -tol::kBoundSlack, "min over states of bound - expected time");
  b.passed = b.passed && bound;
  b.failure = b.passed ? Failure::kNone : Failure::kInvariant;
  out.checks.push_back(std::move(b));
  out.checks.push_back(at_most(prefixed(e, "monte-carlo"), worst_z, 3.0,
                               "largest |mc - exact| in standard errors"));
  return out;
}

// ------------------------------------------------------------------ spectral

ExperimentOutput spectral_experiment(const ExperimentConfig& c, int workers) {
  struct Row {
    SpectralReport<double> report;
    double reconstruction, trace, poincare, tight, envelope_margin;
    bool envelope_holds;
    EnvelopeCheck<double> envelope;
  };
  const auto rows = parallel_map(scenario_count(c), workers, [&](std::size_t i) {
    const auto chain = build_chain(chain_scenario(c, i));
    const auto p0 = chain_start(c, i);
    const Matrix<double> s = symmetrize(chain);
    const auto eig = eigen_decompose(s);
    Row r;
    r.report = spectral_report(chain, p0);
    r.reconstruction = reconstruction_residual(s, eig);
    r.trace = std::abs(eig.values.sum() - chain.kernel.trace());
    const double lambda2 = 1.0 - eig.values(1);
    r.poincare = poincare_margin(chain, chain.potential, lambda2);
    r.tight = poincare_margin(chain, l2_eigenfunction(chain, eig, 1), lambda2);
    auto envelope = convergence_bound_check(chain, p0, c.steps);
    r.envelope_margin = envelope.worst_margin;
    r.envelope_holds = envelope.holds;
    if (i == 0) r.envelope = std::move(envelope);
    return r;
  });

  ExperimentOutput out;
  Table table;
  table.header = {"scenario",  "mu1",        "mu2",        "mu_min",
                  "lambda2",   "rho",        "one_minus_lambda2", "variance_V",
                  "dirichlet_V", "chi0",     "poincare_margin",   "poincare_tight_margin",
                  "envelope_worst_margin"};
  double top = 0, modulus = 0, rec = 0, tr = 0, poincare = std::numeric_limits<double>::infinity();
  double tight = 0, envelope = std::numeric_limits<double>::infinity();
  bool envelope_holds = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    const auto& mu = r.report.eigenvalues_mu;
    table.add_row({I64(i), mu(0), mu(1), mu(mu.size() - 1), r.report.lambda2, r.report.rho,
                   r.report.one_minus_lambda2(), r.report.variance_V, r.report.dirichlet_V,
                   r.report.chi0, r.poincare, r.tight, r.envelope_margin});
    top = worse(top, std::abs(mu(0) - 1.0));
    modulus = worse(modulus, mu.cwiseAbs().maxCoeff() - 1.0);
    rec = worse(rec, r.reconstruction);
    tr = worse(tr, r.trace);
    poincare = worse_margin(poincare, r.poincare);
    tight = worse(tight, std::abs(r.tight));
    envelope = worse_margin(envelope, r.envelope_margin);
    envelope_holds = envelope_holds && r.envelope_holds;
  }
  out.tables.push_back({"spectral.csv", std::move(table)});

  Table curve;
  curve.header = {"t", "deviation", "bound"};
  const auto& first = rows.front().envelope;
  for (std::size_t t = 0; t < first.deviation.size(); ++t) {
    curve.add_row({I64(t), first.deviation[t], first.bound[t]});
  }
  out.tables.push_back({"spectral-envelope.csv", std::move(curve)});

  const auto e = Experiment::kSpectral;
  out.checks.push_back(at_most(prefixed(e, "top-eigenvalue"), top, tol::kIterative, "|mu1 - 1|"));
  out.checks.push_back(at_most(prefixed(e, "eigenvalue-modulus"), std::max(modulus, 0.0),
                               tol::kIterative, "max |mu| - 1"));
  out.checks.push_back(at_most(prefixed(e, "eigen-reconstruction"), rec, tol::kReconstruction));
  out.checks.push_back(at_most(prefixed(e, "trace-identity"), tr, tol::kReconstruction));
  CheckResult env = at_least(prefixed(e, "envelope"), envelope, -tol::kBoundSlack,
                             "min over t of bound - deviation");
  env.passed = env.passed && envelope_holds;
  env.failure = env.passed ? Failure::kNone : Failure::kInvariant;
  out.checks.push_back(std::move(env));
  out.checks.push_back(at_least(prefixed(e, "poincare"), poincare, -tol::kPotential,
                                "min Dirichlet/lambda2 - variance for V"));
  out.checks.push_back(at_most(prefixed(e, "poincare-tightness"), tight, tol::kFiniteDifference,
                               "margin for the second eigenfunction"));
  return out;
}

// ---------------------------------------------------------------------- rlvr

scenarios::FamilyKind family_kind(const ExperimentConfig& c, scenarios::FamilyKind fallback) {
  return c.family ? *c.family : fallback;
}

RlvrFamily<double> config_family(const ExperimentConfig& c, std::size_t i,
                                 scenarios::FamilyKind fallback) {
  return scenarios::random_family(c.seed, i, c.n_prompts, c.n_responses, c.beta,
                                  family_kind(c, fallback));
}

std::vector<Distribution<double>> random_policies(const RlvrFamily<double>& family,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Distribution<double>> out;
  for (const auto& prompt : family.prompts()) {
    out.push_back(Distribution<double>::from_probabilities(rng.dirichlet_flat(prompt.inst.size())));
  }
  return out;
}

ExperimentOutput rlvr_identities(const ExperimentConfig& c, int workers) {
  const std::vector<double> grid = effective_lambda_grid(c);
  struct Point {
    double lambda, mean_r, kl_mean, bern, acc, kl, logz, subopt, jensen, ratio;
  };
  struct FamilyResult {
    std::vector<Point> points;
    double equivalence;
    bool monotone;
    EntropyRuleScaling<double> scaling;
  };
  const std::vector<double> deltas = {0.2, 0.1, 0.05};
  const auto results = parallel_map(scenario_count(c), workers, [&](std::size_t i) {
    const auto family = config_family(c, i, scenarios::FamilyKind::kMixed);
    const auto target = reasoning_target(family);
    FamilyResult fr;
    for (double lambda : grid) {
      const auto here = path_point(family, lambda);
      double kl_mean = 0;
      for (std::size_t x = 0; x < family.size(); ++x) {
        kl_mean += family.weight(x) * kl_divergence(target.tilted[x], here.tilted[x]);
      }
      fr.points.push_back({lambda, here.mean_accuracy(family), kl_mean,
                           bernoulli_identity_check(family, lambda),
                           accuracy_derivative_check(family, lambda),
                           kl_derivative_check(family, lambda),
                           log_partition_derivative_check(family, lambda),
                           suboptimality_check(family, lambda),
                           jensen_aggregate_check(family, lambda),
                           likelihood_ratio_normalization_residual(family, lambda)});
    }
    fr.equivalence =
        suboptimality_residual(family, random_policies(family, derive_seed(derive_seed(c.seed, kPolicyStream), i)));
    // Accuracy rises and KL to the target falls on [0, 1/beta].
    fr.monotone = true;
    double prev_r = -1, prev_kl = std::numeric_limits<double>::infinity();
    for (const auto& p : fr.points) {
      if (p.lambda > family.target_lambda()) continue;
      if (p.mean_r < prev_r - tol::kStructural || p.kl_mean > prev_kl + tol::kStructural) {
        fr.monotone = false;
      }
      prev_r = p.mean_r;
      prev_kl = p.kl_mean;
    }
    fr.scaling = entropy_rule_scaling(family, deltas);
    return fr;
  });

  ExperimentOutput out;
  Table table;
  table.header = {"family", "lambda", "mean_R", "kl_mean", "bernoulli_residual",
                  "accuracy_derivative_residual", "kl_derivative_residual",
                  "log_partition_derivative_residual", "suboptimality_residual",
                  "jensen_margin", "likelihood_ratio_residual"};
  Table rule;
  rule.header = {"family", "delta", "weighted_error", "ratio"};
  double bern = 0, acc = 0, kl = 0, logz = 0, subopt = 0, ratio = 0, equiv = 0, halving = 0;
  double jensen = std::numeric_limits<double>::infinity();
  bool monotone = true, quadratic = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& fr = results[i];
    for (const auto& p : fr.points) {
      table.add_row({I64(i), p.lambda, p.mean_r, p.kl_mean, p.bern, p.acc, p.kl, p.logz, p.subopt,
                     p.jensen, p.ratio});
      bern = worse(bern, p.bern);
      acc = worse(acc, p.acc);
      kl = worse(kl, p.kl);
      logz = worse(logz, p.logz);
      subopt = worse(subopt, p.subopt);
      jensen = worse_margin(jensen, p.jensen);
      ratio = worse(ratio, p.ratio);
    }
    equiv = worse(equiv, fr.equivalence);
    monotone = monotone && fr.monotone;
    quadratic = quadratic && fr.scaling.quadratic;
    for (std::size_t k = 0; k < fr.scaling.deltas.size(); ++k) {
      const double r = k == 0 ? std::numeric_limits<double>::quiet_NaN() : fr.scaling.ratios[k - 1];
      rule.add_row({I64(i), fr.scaling.deltas[k], fr.scaling.errors[k],
                    k == 0 ? Cell(std::string()) : Cell(r)});
      if (k > 0) halving = worse(halving, r);
    }
  }
  out.tables.push_back({"rlvr-identities.csv", std::move(table)});
  out.tables.push_back({"rlvr-entropy-rule.csv", std::move(rule)});

  const auto e = Experiment::kRlvrIdentities;
  out.checks.push_back(at_most(prefixed(e, "bernoulli-identity"), bern, tol::kIterative));
  out.checks.push_back(at_most(prefixed(e, "accuracy-derivative"), acc, tol::kFiniteDifference));
  out.checks.push_back(at_most(prefixed(e, "kl-derivative"), kl, tol::kFiniteDifference));
  out.checks.push_back(
      at_most(prefixed(e, "log-partition-derivative"), logz, tol::kFiniteDifference));
  out.checks.push_back(at_most(prefixed(e, "path-suboptimality"), subopt, tol::kIterative));
  out.checks.push_back(at_most(prefixed(e, "equivalence"), equiv, tol::kIterative,
                               "random off-path policies"));
  out.checks.push_back(at_least(prefixed(e, "jensen"), jensen, -tol::kStructural));
  out.checks.push_back(at_most(prefixed(e, "likelihood-ratio"), ratio, tol::kStructural));
  out.checks.push_back(flag(prefixed(e, "monotone-path"), monotone,
                            "mean accuracy non-decreasing and KL non-increasing on [0, 1/beta]"));
  CheckResult q = at_most(prefixed(e, "entropy-rule-halving"), halving, tol::kHalvingRatio,
                          "largest error ratio per halving of delta");
  q.passed = quadratic;
  q.failure = q.passed ? Failure::kNone : Failure::kInvariant;
  out.checks.push_back(std::move(q));
  return out;
}

ExperimentOutput rlvr_flow(const ExperimentConfig& c, int workers) {
  const double horizon = 50.0 / c.beta;
  const std::vector<double> probe_times = {0.1, 1.0, 5.0};
  struct FamilyResult {
    double ode, tv, consistency;
    bool schedule_ok;
  };
  const auto results = parallel_map(scenario_count(c), workers, [&](std::size_t i) {
    const auto family = config_family(c, i, scenarios::FamilyKind::kMixed);
    FamilyResult fr{0, 0, 0, true};
    std::vector<double> times = probe_times;
    for (int k = 1; k <= 10; ++k) times.push_back(horizon * k / 10.0);
    for (double t : times) {
      fr.ode = worse(fr.ode, flow_ode_residual(family, t));
      const auto [state, point] = flow_solution(family, t);
      const auto direct = path_point(family, flow_schedule(family.beta(), t));
      for (std::size_t x = 0; x < family.size(); ++x) {
        fr.consistency = worse(fr.consistency, (point.tilted[x].probabilities() -
                                                direct.tilted[x].probabilities())
                                                   .cwiseAbs()
                                                   .maxCoeff());
      }
      if (!(state.schedule_lambda >= 0.0 && state.schedule_lambda <= family.target_lambda())) {
        fr.schedule_ok = false;
      }
    }
    const auto end = flow_solution(family, horizon).second;
    const auto target = reasoning_target(family);
    for (std::size_t x = 0; x < family.size(); ++x) {
      fr.tv = worse(fr.tv, total_variation(end.tilted[x], target.tilted[x]));
    }
    return fr;
  });

  ExperimentOutput out;
  // Curve for the first family on an evenly spaced grid of steps+1 times.
  {
    const auto family = config_family(c, 0, scenarios::FamilyKind::kMixed);
    const auto target = reasoning_target(family);
    Table curve;
    curve.header = {"t", "schedule_lambda", "mean_R", "mean_H", "kl_mean", "ode_residual",
                    "tv_to_target"};
    for (int k = 0; k <= c.steps; ++k) {
      const double t = horizon * k / c.steps;
      const auto [state, point] = flow_solution(family, t);
      double kl_mean = 0, tv = 0;
      for (std::size_t x = 0; x < family.size(); ++x) {
        kl_mean += family.weight(x) * kl_divergence(target.tilted[x], point.tilted[x]);
        tv = std::max(tv, total_variation(point.tilted[x], target.tilted[x]));
      }
      curve.add_row({t, state.schedule_lambda, point.mean_accuracy(family),
                     point.mean_entropy(family), kl_mean,
                     k == 0 ? Cell(std::string()) : Cell(flow_ode_residual(family, t)), tv});
    }
    out.tables.push_back({"rlvr-flow.csv", std::move(curve)});
  }

  double ode = 0, tv = 0, consistency = 0;
  bool schedule_ok = true;
  for (const auto& fr : results) {
    ode = worse(ode, fr.ode);
    tv = worse(tv, fr.tv);
    consistency = worse(consistency, fr.consistency);
    schedule_ok = schedule_ok && fr.schedule_ok;
  }
  const auto e = Experiment::kRlvrFlow;
  out.checks.push_back(at_most(prefixed(e, "ode-residual"), ode, tol::kFiniteDifference));
  out.checks.push_back(at_most(prefixed(e, "convergence"), tv, tol::kIterative,
                               "total variation to the target at t = 50/beta"));
  out.checks.push_back(at_most(prefixed(e, "path-consistency"), consistency, tol::kStructural));
  out.checks.push_back(flag(prefixed(e, "schedule-range"), schedule_ok,
                            "schedule lambda stays in [0, 1/beta]"));
  return out;
}

std::string fit_detail(const EntropyTraceFit<double>& fit) {
  std::string out = std::string(to_string(fit.status)) + "; a=" + format_real(fit.fitted_a) +
                    " b=" + format_real(fit.fitted_b) + " rms=" + format_real(fit.fit_residual) +
                    " corr=" + format_real(fit.correlation);
  return out;
}

ExperimentOutput entropy_trace(const ExperimentConfig& c, int workers) {
  const auto fits = parallel_map(scenario_count(c), workers, [&](std::size_t i) {
    return entropy_accuracy_trace(config_family(c, i, scenarios::FamilyKind::kHighAccuracy),
                                  c.steps);
  });

  ExperimentOutput out;
  Table table;
  table.header = {"n", "lambda", "mean_R", "mean_H", "kl_mean", "jensen_margin"};
  for (const auto& step : fits.front().steps) {
    table.add_row({I64(step.n), step.lambda, step.mean_accuracy, step.mean_entropy, step.mean_kl,
                   step.jensen_margin});
  }
  out.tables.push_back({"entropy-trace.csv", std::move(table)});

  Table summary;
  summary.header = {"family", "mean_target_R", "fitted_a", "fitted_b", "fit_residual",
                    "correlation", "status"};
  double worst_corr = -1.0;
  double jensen = std::numeric_limits<double>::infinity();
  std::size_t applicable = 0;
  bool association = true;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto& f = fits[i];
    summary.add_row({I64(i), f.mean_target_accuracy, f.fitted_a, f.fitted_b, f.fit_residual,
                     f.correlation, std::string(to_string(f.status))});
    for (const auto& step : f.steps) jensen = worse_margin(jensen, step.jensen_margin);
    if (!f.applicable()) continue;
    ++applicable;
    worst_corr = worse(worst_corr, f.correlation);
    if (!(f.correlation <= tol::kTraceCorrelation && f.fitted_a > 0.0)) association = false;
  }
  out.tables.push_back({"entropy-trace-fits.csv", std::move(summary)});

  const auto e = Experiment::kEntropyTrace;
  std::string detail = "threshold: correlation <= " + format_real(tol::kTraceCorrelation) +
                       " and a > 0 when mean R* >= " + format_real(tol::kTracePremiseAccuracy) +
                       "; applicable fits " + std::to_string(applicable) + "/" +
                       std::to_string(fits.size()) + "; first fit: " + fit_detail(fits.front());
  if (applicable == 0) detail = "non-applicable; " + detail;
  CheckResult assoc = at_most(prefixed(e, "association"), applicable ? worst_corr : 0.0,
                              tol::kTraceCorrelation, std::move(detail));
  assoc.passed = association;
  assoc.failure = assoc.passed ? Failure::kNone : Failure::kInvariant;
  out.checks.push_back(std::move(assoc));
  out.checks.push_back(at_least(prefixed(e, "jensen"), jensen, -tol::kStructural));
  return out;
}

Failure failure_of(const Error& error) {
  return is_numerical_failure(error.kind()) ? Failure::kNumerical : Failure::kInvariant;
}

}  // namespace

ExperimentOutput run_experiment(Experiment experiment, const ExperimentConfig& config,
                                int workers) {
  switch (experiment) {
    case Experiment::kVerifyDb: return verify_db(config, workers);
    case Experiment::kEvolve: return evolve_experiment(config, workers);
    case Experiment::kHitting: return hitting_experiment(config, workers);
    case Experiment::kSpectral: return spectral_experiment(config, workers);
    case Experiment::kRlvrIdentities: return rlvr_identities(config, workers);
    case Experiment::kRlvrFlow: return rlvr_flow(config, workers);
    case Experiment::kEntropyTrace: return entropy_trace(config, workers);
  }
  throw Error(ErrorKind::kInvalidScenario, "unknown experiment");
}

RunManifest run(const ExperimentConfig& config, std::span<const Experiment> experiments,
                const std::filesystem::path& out_dir, int workers) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorKind::kIoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
  }
  RunManifest manifest;
  manifest.config_digest = config_digest(config);
  manifest.version = artifact_version();
  manifest.canonical_config = serialize(config);
  for (Experiment e : experiments) {
    try {
      ExperimentOutput output = run_experiment(e, config, workers);
      for (const auto& t : output.tables) emit_csv(t.table, out_dir / t.file);
      for (auto& check : output.checks) manifest.add(std::move(check));
    } catch (const Error& error) {
      if (error.kind() == ErrorKind::kIoFailure) throw;
      CheckResult c;
      c.name = std::string(to_string(e)) + "/error";
      c.passed = false;
      c.worst = error.residual();
      c.tolerance = 0.0;
      c.detail = error.what();
      c.failure = failure_of(error);
      manifest.add(std::move(c));
    }
  }
  const std::string text = to_json(manifest);
  std::ofstream out(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot write manifest.json");
  return manifest;
}

int default_worker_count() {
  if (const char* env = std::getenv("LAB_WORKERS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0 && value <= 1024) return static_cast<int>(value);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace ebmlab::lab
