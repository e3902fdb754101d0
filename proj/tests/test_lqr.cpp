#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "kronsensus/lqr.hpp"
#include "kronsensus/spectral.hpp"
#include "oracles.hpp"

using namespace kronsensus;

namespace {

MatrixXd symmetric_seed(double lambda) {
  MatrixXd a(2, 2);
  a << (1 + lambda) / 2, (1 - lambda) / 2, (1 - lambda) / 2, (1 + lambda) / 2;
  return a;
}

// Horizon after which rho^(2t) drops below 1e-16.
int oracle_horizon(double rho) {
  if (rho <= 0) return 64;
  return std::max(64, static_cast<int>(std::ceil(std::log(1e-16) / (2 * std::log(rho)))) + 16);
}

}  // namespace

TEST(Series, DeadbeatNine) {
  const Strategy s = block_kron_strategy(deadbeat_seed(3), 2);
  EXPECT_NEAR(j1_exact(s).value, 10.0, 1e-9);
  EXPECT_NEAR(j2_exact(s).value, 12.0, 1e-9);
  EXPECT_NEAR(j1_exact(s.matrix()).value, 10.0, 1e-9);
  EXPECT_NEAR(j2_exact(s.matrix()).value, 12.0, 1e-9);
  const auto terms = trace_series(s.matrix(), 4);
  EXPECT_NEAR(terms[0].tr_mtm - 1, 8.0, 1e-12);
  EXPECT_NEAR(terms[1].tr_mtm - 1, 2.0, 1e-12);
  EXPECT_NEAR(terms[2].tr_mtm - 1, 0.0, 1e-12);
}

TEST(Series, DeadbeatEightyOne) {
  const Strategy s = block_kron_strategy(deadbeat_seed(3), 4);
  EXPECT_NEAR(j1_exact(s).value, 116.0, 1e-9);
  EXPECT_NEAR(j2_exact(s).value, 152.0, 1e-9);
  const auto dense = oracle::dense_costs(s.matrix(), 8);
  EXPECT_NEAR(dense.j1, 116.0, 1e-9);
  EXPECT_NEAR(dense.j2, 152.0, 1e-9);
}

TEST(Series, AlreadyAtConsensus) {
  const MatrixXd one = MatrixXd::Ones(1, 1);
  EXPECT_EQ(j1_exact(one).value, 0.0);
  EXPECT_EQ(j2_exact(one).value, 0.0);
}

TEST(Series, AgreesWithDenseOracle) {
  Rng rng(71);
  std::vector<Strategy> strategies;
  for (int i = 0; i < 6; ++i) strategies.push_back(block_kron_strategy(oracle::random_normal_seed(2 + i % 2, rng), 2 + i % 3));
  for (int i = 0; i < 4; ++i) strategies.push_back(block_kron_strategy(oracle::random_doubly_stochastic(3, rng), 1 + i % 3));
  for (Index n : {5, 9, 16}) strategies.push_back(cayley_strategy(AbelianGroup({n}), uniform_generator({{-1}, {0}, {1}})));
  strategies.push_back(cayley_strategy(AbelianGroup({3, 3}), uniform_generator({{0, 0}, {1, 0}, {0, 1}})));
  for (int i = 0; i < 3; ++i) strategies.push_back(custom_strategy(oracle::random_doubly_stochastic(12, rng)));
  int checked = 0;
  for (const auto& s : strategies) {
    const double rho = essential_spectral_radius(s).ess_radius;
    if (rho >= 0.95 || s.dimension() > 81) continue;
    const auto dense = oracle::dense_costs(s.matrix(), oracle_horizon(rho));
    const double j1 = j1_exact(s).value, j2 = j2_exact(s).value;
    EXPECT_NEAR(j1, dense.j1, 1e-10 * std::max(1.0, dense.j1)) << to_string(s.family()) << " N=" << s.dimension();
    EXPECT_NEAR(j2, dense.j2, 1e-10 * std::max(1.0, dense.j2)) << to_string(s.family()) << " N=" << s.dimension();
    // The dense path on the bare matrix agrees with the structured path.
    EXPECT_NEAR(j1_exact(s.matrix()).value, j1, 1e-9 * std::max(1.0, j1));
    EXPECT_NEAR(j2_exact(s.matrix()).value, j2, 1e-9 * std::max(1.0, j2));
    ++checked;
  }
  EXPECT_GE(checked, 15);
}

TEST(Series, TailBoundAndTermCount) {
  const Strategy s = block_kron_strategy(symmetric_seed(0.8), 3);
  SeriesOptions loose;
  loose.rel_tol = 1e-4;
  const auto coarse = j1_exact(s, loose);
  const auto fine = j1_exact(s);
  EXPECT_LT(coarse.terms, fine.terms);
  EXPECT_GE(coarse.terms, 12u);
  EXPECT_LE(fine.tail_bound, 1e-12 * fine.value);
  EXPECT_NEAR(coarse.value, fine.value, coarse.tail_bound + 1e-4 * fine.value);
  SeriesOptions tiny;
  tiny.max_terms = 5;
  EXPECT_EQ(j1_exact(s, tiny).terms, 5u);
}

TEST(Series, Errors) {
  MatrixXd row_only(2, 2);
  row_only << 0.5, 0.5, 0.9, 0.1;
  EXPECT_THROW(j1_exact(row_only), DomainError);
  EXPECT_THROW(j1_exact(MatrixXd::Identity(2, 2)), DivergenceError);
  MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  EXPECT_THROW(j2_exact(swap), DivergenceError);
  const Strategy identity = cayley_strategy(AbelianGroup({3}), {{{0}, 1.0}});
  EXPECT_THROW(j1_exact(identity), DivergenceError);
}

TEST(Traces, ConsensusTermIsAtLeastOne) {
  Rng rng(72);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd m = trial % 2 ? oracle::random_doubly_stochastic(6, rng) : block_kron_matrix(oracle::random_normal_seed(3, rng), 2);
    for (const auto& term : trace_series(m, 20)) EXPECT_GE(term.tr_mtm, 1.0 - 1e-12);
  }
}

TEST(Traces, StructuredMatchesDense) {
  Rng rng(73);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + trial % 2;
    const int k = 2 + trial % 3;
    const MatrixXd a = oracle::random_normal_seed(n, rng);
    const auto fast = kron_trace_series(a, k, 3 * static_cast<std::uint64_t>(k) + 2);
    const auto slow = trace_series(block_kron_matrix(a, k), 3 * static_cast<std::uint64_t>(k) + 2);
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t t = 0; t < fast.size(); ++t) {
      EXPECT_EQ(fast[t].t, t);
      EXPECT_NEAR(fast[t].tr_mtm, slow[t].tr_mtm, 1e-9 * slow[t].tr_mtm);
      EXPECT_NEAR(fast[t].tr_cross, slow[t].tr_cross, 1e-8);
    }
  }
}

TEST(Bounds, DeadbeatIsTight) {
  const Bounds b = j1_bounds(deadbeat_seed(3), 2);
  EXPECT_NEAR(b.lower, 10.0, 1e-12);
  EXPECT_NEAR(b.upper, 10.0, 1e-12);
  const Bounds b4 = j1_bounds(deadbeat_seed(3), 4);
  EXPECT_NEAR(b4.lower, 116.0, 1e-9);
}

TEST(Bounds, SymmetricTwoByTwoFormulas) {
  const MatrixXd a = symmetric_seed(1.0 / 3);
  const Bounds b = j1_bounds(a, 2);
  const double q = (10.0 / 9) / 2;
  const double lower = 4 * (1 - q * q) / (1 - q) - 2;
  EXPECT_NEAR(b.lower, lower, 1e-12);
  EXPECT_NEAR(b.lower, 38.0 / 9, 1e-12);
  EXPECT_NEAR(b.upper, lower + 2 / (1 - 1.0 / 9) * (10.0 / 9 - 1), 1e-12);
  EXPECT_LE(b.lower, j1_exact(block_kron_strategy(a, 2)).value);
}

TEST(Bounds, SingleFactorSandwich) {
  Rng rng(74);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd a = oracle::random_normal_seed(2 + trial % 3, rng);
    const Bounds b = j1_bounds(a, 1);
    const double exact = j1_exact(a).value;
    EXPECT_NEAR(b.lower, static_cast<double>(a.rows()) - 1, 1e-12);
    EXPECT_LE(b.lower, exact * (1 + 1e-6));
    EXPECT_LE(exact, b.upper * (1 + 1e-6));
  }
}

TEST(Bounds, LowerBoundHoldsForLongerChains) {
  Rng rng(75);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd a = oracle::random_normal_seed(2 + trial % 2, rng);
    const int k = 2 + trial % 3;
    EXPECT_LE(j1_bounds(a, k).lower, j1_exact(block_kron_strategy(a, k)).value * (1 + 1e-6));
  }
}

TEST(Bounds, Preconditions) {
  MatrixXd shear(3, 3);
  shear << 0.5, 0.5, 0, 0.25, 0.25, 0.5, 0.25, 0.25, 0.5;
  ASSERT_FALSE(is_normal(shear));
  EXPECT_THROW(j1_bounds(shear, 2), DomainError);
  EXPECT_THROW(j2_bounds(shear, 2, 1.0), DomainError);
  EXPECT_THROW(j1_bounds(MatrixXd::Identity(2, 2), 2), DomainError);
  EXPECT_THROW(j1_bounds(deadbeat_seed(2), 0), DomainError);
}

TEST(Bounds, J2Formulas) {
  const MatrixXd a = symmetric_seed(0.5);
  const Bounds b = j2_bounds(a, 2, 7.0);
  EXPECT_NEAR(b.upper, 2 * 7.0 - 4, 1e-12);
  EXPECT_NEAR(b.lower, 2 * 7.0 - 4 - 1 / (1 - 0.25), 1e-12);
}

TEST(NoTradeOff, SquaredNormIsMinimalAtAveraging) {
  Rng rng(76);
  for (Index n : {2, 3, 4, 6}) {
    EXPECT_NEAR(deadbeat_seed(n).squaredNorm(), 1.0, 1e-14);
    for (int trial = 0; trial < 50; ++trial) {
      const MatrixXd a = trial % 2 ? oracle::random_doubly_stochastic(n, rng) : oracle::random_normal_seed(n, rng);
      const double tr = (a.transpose() * a).trace();
      EXPECT_GE(tr, 1.0 - 1e-12);
      // Equality forces a to be the averaging matrix.
      EXPECT_NEAR(tr - 1.0, (a - averaging_matrix(n)).squaredNorm(), 1e-12);
    }
  }
}

TEST(ClosedForm, DeadbeatSlack) {
  for (int k : {1, 2, 3, 4}) {
    const Strategy s = block_kron_strategy(deadbeat_seed(3), k);
    const double j1 = j1_exact(s).value, j2 = j2_exact(s).value;
    for (double gamma : {0.0, 0.1, 1.0, 10.0}) {
      const double closed = j_closed_form_deadbeat(3, k, gamma);
      EXPECT_LE(std::abs(closed - (j1 + gamma * j2)), (1 + 2 * gamma) * k + 1e-9) << k << " " << gamma;
    }
  }
  EXPECT_NEAR(j_closed_form_deadbeat(3, 2, 0.0), 12.0, 1e-12);
  EXPECT_NEAR(j_closed_form_deadbeat(3, 4, 1.0), 279.0, 1e-9);
  EXPECT_THROW(j_closed_form_deadbeat(1, 2, 0.0), DomainError);
  EXPECT_THROW(j_closed_form_deadbeat(3, 0, 0.0), DomainError);
}

TEST(ClosedForm, Riccati) {
  EXPECT_DOUBLE_EQ(j_riccati_unconstrained(81, 0.0), 81.0);
  EXPECT_DOUBLE_EQ(j_riccati_unconstrained(10, 2.0), 20.0);
  EXPECT_NEAR(j_riccati_unconstrained(81, 0.01), 81.80206, 5e-6);
  EXPECT_THROW(j_riccati_unconstrained(81, -1.0), DomainError);
  EXPECT_THROW(j_riccati_unconstrained(0, 1.0), DomainError);
}

TEST(MonteCarlo, DeadbeatNine) {
  const MatrixXd m = block_kron_matrix(deadbeat_seed(3), 2);
  const auto g0 = j_monte_carlo(m, 0.0, 10000, 8, 1);
  EXPECT_LE(std::abs(g0.estimate - 10.0), 3 * g0.std_error);
  EXPECT_GT(g0.std_error, 0.0);
  EXPECT_TRUE(g0.horizon_ok);
  const auto g1 = j_monte_carlo(m, 1.0, 10000, 8, 1);
  EXPECT_LE(std::abs(g1.estimate - 22.0), 3 * g1.std_error);
  EXPECT_NEAR(g1.estimate, g1.j1 + g1.j2, 1e-12 * g1.estimate);
}

TEST(MonteCarlo, UniformInitialStatesAgree) {
  const MatrixXd m = block_kron_matrix(symmetric_seed(0.5), 3);
  const double exact = j1_exact(m).value + 0.5 * j2_exact(m).value;
  MonteCarloOptions uniform;
  uniform.distribution = InitialDistribution::Uniform;
  const auto u = j_monte_carlo(m, 0.5, 20000, 80, 3, uniform);
  const auto g = j_monte_carlo(m, 0.5, 20000, 80, 3);
  EXPECT_LE(std::abs(u.estimate - exact), 4 * u.std_error);
  EXPECT_LE(std::abs(g.estimate - exact), 4 * g.std_error);
  EXPECT_NE(u.estimate, g.estimate);
}

TEST(MonteCarlo, TrivialStrategyCostsNothing) {
  const auto r = j_monte_carlo(MatrixXd::Ones(1, 1), 1.0, 100, 10, 0);
  EXPECT_EQ(r.estimate, 0.0);
  EXPECT_EQ(r.std_error, 0.0);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
  const MatrixXd m = block_kron_matrix(symmetric_seed(0.3), 2);
  MonteCarloOptions one, many;
  many.threads = 7;
  const auto a = j_monte_carlo(m, 1.0, 999, 40, 42, one);
  const auto b = j_monte_carlo(m, 1.0, 999, 40, 42, many);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
  const auto c = j_monte_carlo(m, 1.0, 999, 40, 43, one);
  EXPECT_NE(a.estimate, c.estimate);
}

TEST(MonteCarlo, ShortHorizonIsFlagged) {
  const Strategy s = cayley_strategy(AbelianGroup({27}), uniform_generator({{-1}, {0}, {1}}));
  const auto r = j_monte_carlo(s.matrix(), 0.0, 200, 3, 5);
  EXPECT_FALSE(r.horizon_ok);
  EXPECT_GT(r.tail_estimate, r.std_error);
}

TEST(MonteCarlo, Errors) {
  const MatrixXd m = averaging_matrix(2);
  EXPECT_THROW(j_monte_carlo(m, 0.0, 0, 5, 0), DomainError);
  EXPECT_THROW(j_monte_carlo(m, 0.0, 10, -1, 0), DomainError);
  EXPECT_THROW(j_monte_carlo(m, -1.0, 10, 5, 0), DomainError);
  EXPECT_THROW(j_monte_carlo(MatrixXd::Identity(2, 2), 0.0, 10, 5, 0), DivergenceError);
}

TEST(CostReport, ExactSeriesWithBounds) {
  const Strategy s = block_kron_strategy(deadbeat_seed(3), 2);
  const CostReport r = cost_report(s, 1.0, CostMethod::ExactSeries);
  EXPECT_NEAR(r.j1, 10.0, 1e-9);
  EXPECT_NEAR(r.j2, 12.0, 1e-9);
  EXPECT_DOUBLE_EQ(r.j, r.j1 + r.j2);
  EXPECT_NEAR(r.j1_lower, 10.0, 1e-12);
  EXPECT_NEAR(r.j1_upper, 10.0, 1e-12);
  EXPECT_GE(r.truncation_t, 8u);
}

TEST(CostReport, ClosedFormOnlyForDeadbeat) {
  const Strategy s = block_kron_strategy(deadbeat_seed(3), 4);
  const CostReport r = cost_report(s, 1.0, CostMethod::ClosedForm);
  EXPECT_NEAR(r.j1, 116.0, 1e-9);
  EXPECT_NEAR(r.j2, 152.0, 1e-9);
  EXPECT_THROW(cost_report(block_kron_strategy(symmetric_seed(0.5), 2), 1.0, CostMethod::ClosedForm), DomainError);
  EXPECT_THROW(cost_report(s, -1.0, CostMethod::ExactSeries), DomainError);
}

TEST(CostReport, BoundsAbsentForCayley) {
  const Strategy s = cayley_strategy(AbelianGroup({9}), uniform_generator({{-1}, {0}, {1}}));
  const CostReport r = cost_report(s, 0.5, CostMethod::ExactSeries);
  EXPECT_TRUE(std::isnan(r.j1_lower));
  EXPECT_TRUE(std::isnan(r.j2_upper));
  const auto j = nlohmann::json::parse(cost_report_json(r));
  EXPECT_TRUE(j.at("j1_lower").is_null());
  EXPECT_EQ(j.at("method"), to_string(CostMethod::ExactSeries));
  EXPECT_NEAR(j.at("j").get<double>(), r.j, 1e-12);
}

TEST(CostReport, MonteCarloPicksHorizon) {
  const Strategy s = block_kron_strategy(deadbeat_seed(3), 2);
  CostOptions options;
  options.trials = 4000;
  options.seed = 9;
  const CostReport r = cost_report(s, 1.0, CostMethod::MonteCarlo, options);
  EXPECT_EQ(r.method, CostMethod::MonteCarlo);
  EXPECT_GE(r.truncation_t, 8u);
  EXPECT_GT(r.std_error, 0.0);
  EXPECT_LE(std::abs(r.j - 22.0), 4 * r.std_error);
  const auto j = nlohmann::json::parse(cost_report_json(r));
  EXPECT_TRUE(j.contains("std_error"));
}

TEST(CostReport, MethodNames) {
  for (auto m : {CostMethod::ExactSeries, CostMethod::ClosedForm, CostMethod::MonteCarlo}) {
    EXPECT_EQ(parse_cost_method(to_string(m)), m);
  }
  EXPECT_EQ(parse_cost_method("series"), CostMethod::ExactSeries);
  EXPECT_EQ(parse_cost_method("closed-form"), CostMethod::ClosedForm);
  EXPECT_EQ(parse_cost_method("monte-carlo"), CostMethod::MonteCarlo);
  EXPECT_THROW(parse_cost_method("riccati"), DomainError);
}

TEST(CostReport, GammaSweepCsv) {
  const Strategy s = block_kron_strategy(deadbeat_seed(3), 2);
  std::vector<CostReport> reports;
  for (double g : {0.0, 1.0}) reports.push_back(cost_report(s, g, CostMethod::ClosedForm));
  std::ostringstream os;
  write_gamma_sweep_csv(os, reports);
  EXPECT_EQ(os.str(), "gamma,j1,j2,j,j1_lower,j1_upper\n0,10,12,10,10,10\n1,10,12,22,10,10\n");
}
