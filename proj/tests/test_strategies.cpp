#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "kronsensus/matrix_io.hpp"
#include "kronsensus/strategies.hpp"
#include "oracles.hpp"

using namespace kronsensus;

namespace {

MatrixXd circulant_example(Index n) {
  MatrixXd p = MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    p(i, i) = 1.0 / 3;
    p(i, (i + 1) % n) = 1.0 / 3;
    p(i, (i + n - 1) % n) = 1.0 / 3;
  }
  return p;
}

// Smallest t <= t_max with M^t entrywise positive, if any.
std::optional<int> first_positive_power(const MatrixXd& m, int t_max) {
  MatrixXd p = MatrixXd::Identity(m.rows(), m.cols());
  for (int t = 1; t <= t_max; ++t) {
    p = p * m;
    if (p.minCoeff() > 0) return t;
  }
  return std::nullopt;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("kronsensus_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Validate, UniformAveragingPasses) {
  const auto r = validate_consensus(averaging_matrix(3));
  EXPECT_TRUE(r.passes());
  EXPECT_EQ(r.degree_bound, 3);
  EXPECT_TRUE(r.nonnegative);
  EXPECT_EQ(r.failure(), "");
}

TEST(Validate, IdentityFailsSimpleEigenvalue) {
  const auto r = validate_consensus(MatrixXd::Identity(3, 3));
  EXPECT_TRUE(r.row_sums_ok);
  EXPECT_TRUE(r.col_sums_ok);
  EXPECT_FALSE(r.one_simple);
  EXPECT_EQ(r.details.eigenvalues_near_one, 3);
  EXPECT_FALSE(r.solves_consensus());
  EXPECT_NE(r.failure().find("(B)"), std::string::npos);
}

TEST(Validate, CirculantExampleAtFive) {
  const auto r = validate_consensus(circulant_example(5));
  EXPECT_TRUE(r.solves_consensus());
  EXPECT_EQ(r.degree_bound, 3);
  EXPECT_NEAR(r.details.max_other_modulus, (1 + 2 * std::cos(2 * std::numbers::pi / 5)) / 3, 1e-12);
}

TEST(Validate, RowStochasticOnlyFailsColumns) {
  MatrixXd m(2, 2);
  m << 0.5, 0.5, 0.9, 0.1;
  const auto r = validate_consensus(m);
  EXPECT_TRUE(r.row_sums_ok);
  EXPECT_FALSE(r.col_sums_ok);
  EXPECT_NEAR(r.details.max_col_sum_error, 0.4, 1e-12);
}

TEST(Validate, PeriodicMatrixFailsStability) {
  MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  const auto r = validate_consensus(swap);
  EXPECT_TRUE(r.one_simple);
  EXPECT_FALSE(r.spectrum_stable);
  EXPECT_NEAR(r.details.max_other_modulus, 1.0, 1e-12);
}

TEST(Validate, DegreeLimit) {
  const auto r = validate_consensus(averaging_matrix(3), Index{2});
  EXPECT_TRUE(r.solves_consensus());
  EXPECT_FALSE(r.degree_ok);
  EXPECT_FALSE(r.passes());
  EXPECT_NE(r.failure().find("(D)"), std::string::npos);
  EXPECT_TRUE(validate_consensus(averaging_matrix(3), Index{3}).passes());
}

TEST(Validate, SignedMatricesAreAccepted) {
  // Symmetric, doubly stochastic, one negative entry, eigenvalues {1, 0.4, -0.2}.
  MatrixXd m(3, 3);
  m << 0.6, 0.6, -0.2, 0.6, 0.0, 0.4, -0.2, 0.4, 0.8;
  const auto r = validate_consensus(m);
  EXPECT_FALSE(r.nonnegative);
  EXPECT_TRUE(r.row_sums_ok && r.col_sums_ok && r.one_simple);
  EXPECT_EQ(r.solves_consensus(), oracle::ess_radius(m) < 1 - 1e-9);
}

TEST(Validate, TinyEntriesDoNotCountTowardDegree) {
  MatrixXd m = MatrixXd::Zero(3, 3);
  m.topLeftCorner(2, 2) = averaging_matrix(2);
  m(2, 2) = 1;
  m(0, 2) = 1e-13;
  EXPECT_EQ(validate_consensus(m).degree_bound, 2);
  m(0, 2) = 1e-11;
  EXPECT_EQ(validate_consensus(m).degree_bound, 3);
}

TEST(Validate, Errors) {
  EXPECT_THROW(validate_consensus(MatrixXd::Ones(2, 3)), DomainError);
  EXPECT_THROW(validate_consensus(averaging_matrix(3), std::vector<Complex>{1.0}), DomainError);
}

TEST(BlockKronStrategy, PrintedEightByEight) {
  const double alpha = 0.6, beta = 0.4;
  MatrixXd a(2, 2);
  a << alpha, beta, beta, alpha;
  MatrixXd expected = MatrixXd::Zero(8, 8);
  for (Index r = 0; r < 4; ++r) {
    expected(r, 2 * r) = alpha;
    expected(r, 2 * r + 1) = beta;
    expected(r + 4, 2 * r) = beta;
    expected(r + 4, 2 * r + 1) = alpha;
  }
  const Strategy s = block_kron_strategy(a, 3);
  EXPECT_EQ(s.matrix(), expected);
  EXPECT_EQ(s.family(), Family::BlockKronecker);
  EXPECT_EQ(s.n(), 2);
  EXPECT_EQ(s.k(), 3);
  EXPECT_EQ(s.nu(), 2);
  EXPECT_EQ(s.spectrum_method(), SpectrumMethod::KroneckerClosedForm);
  EXPECT_TRUE(s.validation().passes());
}

TEST(BlockKronStrategy, KOneIsSeed) {
  Rng rng(41);
  const MatrixXd a = oracle::random_normal_seed(3, rng);
  EXPECT_EQ(block_kron_strategy(a, 1).matrix(), a);
}

TEST(BlockKronStrategy, DeadbeatFiniteTime) {
  const Strategy s = block_kron_strategy(deadbeat_seed(3), 4);
  EXPECT_EQ(s.dimension(), 81);
  EXPECT_LE(inf_norm(MatrixXd(mat_pow(s.matrix(), 4) - averaging_matrix(81))), 1e-12);
  EXPECT_GT(inf_norm(MatrixXd(mat_pow(s.matrix(), 3) - averaging_matrix(81))), 0.1);
}

TEST(BlockKronStrategy, MatchesStackedDefinitionAndOperator) {
  Rng rng(42);
  for (Index n : {2, 3}) {
    for (int k = 1; k <= 4; ++k) {
      const MatrixXd a = oracle::random_matrix(n, n, rng);
      const MatrixXd m = block_kron_matrix(a, k);
      EXPECT_EQ(m, oracle::stacked_m(a, k));
      if (k > 1) {
        const MatrixXd ident = kron_power(MatrixXd::Identity(n, n), k - 1);
        EXPECT_EQ(m, block_kron(ident, a, n));
      }
    }
  }
}

TEST(BlockKronStrategy, ComponentwiseFormula) {
  Rng rng(43);
  const Index n = 3;
  const int k = 3;
  const MatrixXd a = oracle::random_matrix(n, n, rng);
  const MatrixXd m = block_kron_matrix(a, k);
  for (Index p = 0; p < m.rows(); ++p) {
    const auto pd = oracle::digits(p, n, k);
    for (Index q = 0; q < m.cols(); ++q) {
      const auto qd = oracle::digits(q, n, k);
      const bool shift = std::equal(qd.begin(), qd.end() - 1, pd.begin() + 1);
      EXPECT_EQ(m(p, q), shift ? a(pd[0], qd[k - 1]) : 0.0);
    }
  }
}

TEST(BlockKronStrategy, RejectsInvalidSeed) {
  try {
    block_kron_strategy(MatrixXd::Identity(2, 2), 3);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_FALSE(e.report().one_simple);
    EXPECT_NE(std::string(e.what()).find("(B)"), std::string::npos);
  }
  MatrixXd row_only(2, 2);
  row_only << 0.5, 0.5, 0.9, 0.1;
  EXPECT_THROW(block_kron_strategy(row_only, 2), ValidationError);
  EXPECT_THROW(block_kron_strategy(MatrixXd::Ones(2, 3), 2), DomainError);
  EXPECT_THROW(block_kron_matrix(averaging_matrix(2), 0), DomainError);
  Limits limits;
  limits.max_strategy_dim = 100;
  EXPECT_THROW(block_kron_strategy(averaging_matrix(3), 5, limits), SizeError);
}

TEST(BlockKronStrategy, ValidSeedsGiveValidStrategies) {
  Rng rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 2 + trial % 3;
    const int k = 1 + trial % 4;
    const MatrixXd a = trial % 2 ? oracle::random_normal_seed(n, rng) : oracle::random_doubly_stochastic(n, rng);
    const Strategy s = block_kron_strategy(a, k);
    EXPECT_TRUE(s.validation().passes()) << s.validation().failure();
    EXPECT_LE(s.nu(), n);
    EXPECT_EQ(s.nu(), degree_profile(s.comm_graph()).max_in);
    // The closed-form spectrum agrees with a direct eigensolve of M.
    EXPECT_LE(multiset_distance<double>(s.spectrum(), oracle::eigenvalues(s.matrix())), 1e-6);
  }
}

TEST(Propositions, PowersOfM) {
  Rng rng(45);
  int cases = 0;
  for (Index n : {2, 3}) {
    for (int k : {2, 3}) {
      for (int rep = 0; rep < 3; ++rep) {
        const MatrixXd a = oracle::random_doubly_stochastic(n, rng);
        const MatrixXd m = block_kron_matrix(a, k);
        for (int t = 0; t <= 3 * k; ++t) {
          const int r = t / k, s = t % k;
          const MatrixXd ar = oracle::power(a, r), ar1 = oracle::power(a, r + 1);
          const MatrixXd expected = block_kron(kron_power(ar, k - s), kron_power(ar1, s), n);
          EXPECT_TRUE(approx_equal(mat_pow(m, static_cast<std::uint64_t>(t)), expected, 1e-9)) << n << k << t;
          ++cases;
        }
      }
    }
  }
  EXPECT_GE(cases, 100);
}

TEST(Propositions, KthPowerIsKroneckerPower) {
  Rng rng(46);
  for (Index n : {2, 3}) {
    for (int k : {2, 3, 4}) {
      const MatrixXd a = oracle::random_normal_seed(n, rng);
      EXPECT_TRUE(approx_equal(mat_pow(block_kron_matrix(a, k), static_cast<std::uint64_t>(k)), kron_power(a, k), 1e-9));
    }
  }
}

TEST(Propositions, GramOfPowers) {
  Rng rng(47);
  for (Index n : {2, 3}) {
    for (int k : {2, 3}) {
      const MatrixXd a = oracle::random_matrix(n, n, rng) * 0.8;
      const MatrixXd m = block_kron_matrix(a, k);
      for (int t = 0; t <= 3 * k; ++t) {
        const int r = t / k, s = t % k;
        const MatrixXd ar = oracle::power(a, r), ar1 = oracle::power(a, r + 1);
        const MatrixXd gr = ar.transpose() * ar, gr1 = ar1.transpose() * ar1;
        const MatrixXd mt = oracle::power(m, t);
        const MatrixXd expected = kron(kron_power(gr, k - s), kron_power(gr1, s));
        EXPECT_TRUE(approx_equal(MatrixXd(mt.transpose() * mt), expected, 1e-9)) << n << k << t;
      }
    }
  }
}

TEST(Propositions, CrossTraceForNormalSeeds) {
  Rng rng(48);
  for (int trial = 0; trial < 12; ++trial) {
    const Index n = 2 + trial % 2;
    const int k = 2 + trial % 2;
    const MatrixXd a = oracle::random_normal_seed(n, rng);
    ASSERT_TRUE(is_normal(a));
    const MatrixXd m = block_kron_matrix(a, k);
    for (int t = 0; t <= 3 * k; ++t) {
      const MatrixXd mt = oracle::power(m, t), at = oracle::power(a, t);
      const double lhs = (mt.transpose() * mt * m).trace();
      const double rhs = (at.transpose() * at * a).trace();
      EXPECT_NEAR(lhs, rhs, 1e-8) << trial << " " << t;
    }
  }
}

TEST(Propositions, FiniteTimeDegreeBound) {
  Rng rng(49);
  std::vector<Strategy> strategies;
  for (Index n : {2, 3, 4})
    for (int k = 1; k <= 3; ++k) strategies.push_back(block_kron_strategy(deadbeat_seed(n), k));
  for (int i = 0; i < 6; ++i) strategies.push_back(block_kron_strategy(oracle::random_doubly_stochastic(3, rng), 2));
  for (Index n : {5, 9, 16, 27}) strategies.push_back(cayley_strategy(AbelianGroup({n}), uniform_generator({{-1}, {0}, {1}})));
  strategies.push_back(cayley_strategy(AbelianGroup({3, 3}), uniform_generator({{0, 0}, {1, 0}, {0, 1}})));
  int positive = 0;
  for (const auto& s : strategies) {
    ASSERT_TRUE(s.validation().nonnegative);
    const Index dim = s.dimension();
    // Positivity persists for later powers of a doubly stochastic matrix, so the first one decides.
    const auto t = first_positive_power(s.matrix(), 40);
    if (!t) continue;
    ++positive;
    Index reach = 1;
    for (int i = 0; i < *t && reach < dim; ++i) reach *= s.nu();
    EXPECT_GE(reach, dim) << to_string(s.family()) << " N=" << dim << " t=" << *t;
    EXPECT_GE(*t, min_steps_bound(dim, std::max<Index>(s.nu(), 2)));
  }
  EXPECT_GT(positive, 0);
  EXPECT_EQ(first_positive_power(block_kron_strategy(deadbeat_seed(3), 4).matrix(), 10), 4);
}

TEST(CayleyStrategy, CirculantExample) {
  const Strategy s = cayley_strategy(AbelianGroup({9}), uniform_generator({{0}, {1}, {-1}}));
  EXPECT_TRUE(approx_equal(s.matrix(), circulant_example(9), 1e-15));
  EXPECT_EQ(s.family(), Family::Cayley);
  EXPECT_EQ(s.nu(), 3);
  EXPECT_EQ(s.spectrum_method(), SpectrumMethod::CirculantDFT);
  EXPECT_TRUE(s.validation().passes());
  EXPECT_TRUE(s.warnings().empty());
}

TEST(CayleyStrategy, ProductGroupExampleIsTransposedDisplay) {
  const Strategy s = cayley_strategy(AbelianGroup({3, 3}), uniform_generator({{0, 0}, {1, 0}, {0, 1}}));
  MatrixXd p1 = MatrixXd::Zero(3, 3);
  for (Index i = 0; i < 3; ++i) {
    p1(i, i) = 1.0 / 3;
    p1(i, (i + 1) % 3) = 1.0 / 3;
  }
  const MatrixXd p2 = MatrixXd::Identity(3, 3) / 3.0;
  MatrixXd displayed = MatrixXd::Zero(9, 9);
  for (Index b = 0; b < 3; ++b) {
    displayed.block(3 * b, 3 * b, 3, 3) = p1;
    displayed.block(3 * b, 3 * ((b + 1) % 3), 3, 3) = p2;
  }
  EXPECT_TRUE(approx_equal(s.matrix(), MatrixXd(displayed.transpose()), 1e-15));
  EXPECT_TRUE(s.validation().passes());
}

TEST(CayleyStrategy, TrivialGeneratorIsIdentity) {
  const Strategy s = cayley_strategy(AbelianGroup({3}), {{{0}, 1.0}});
  EXPECT_EQ(s.matrix(), MatrixXd::Identity(3, 3));
  EXPECT_FALSE(s.validation().one_simple);
  EXPECT_FALSE(s.validation().passes());
}

TEST(CayleyStrategy, WarnsWithoutZero) {
  const Strategy s = cayley_strategy(AbelianGroup({5}), uniform_generator({{1}, {-1}}));
  ASSERT_EQ(s.warnings().size(), 1u);
  EXPECT_NE(s.warnings()[0].find("0"), std::string::npos);
}

TEST(CayleyStrategy, SignedGeneratorIsDoublyStochastic) {
  const Strategy s = cayley_strategy(AbelianGroup({7}), {{{0}, 1.2}, {{1}, -0.1}, {{-1}, -0.1}});
  EXPECT_FALSE(s.validation().nonnegative);
  EXPECT_TRUE(s.validation().row_sums_ok);
  EXPECT_TRUE(s.validation().col_sums_ok);
}

TEST(CayleyStrategy, Errors) {
  EXPECT_THROW(cayley_strategy(AbelianGroup({5}), {{{0}, 0.5}}), DomainError);
  EXPECT_THROW(cayley_strategy(AbelianGroup({5}), {}), DomainError);
  EXPECT_THROW(cayley_strategy(AbelianGroup({5}), {{{0, 1}, 1.0}}), DomainError);
}

TEST(CustomStrategy, NumericSpectrum) {
  const Strategy s = custom_strategy(circulant_example(6), Index{3});
  EXPECT_EQ(s.family(), Family::Custom);
  EXPECT_EQ(s.spectrum_method(), SpectrumMethod::NumericQR);
  EXPECT_TRUE(s.validation().passes());
  EXPECT_FALSE(s.seed().has_value());
  EXPECT_FALSE(custom_strategy(circulant_example(6), Index{2}).validation().passes());
}

TEST(Deadbeat, Seed) {
  EXPECT_EQ(deadbeat_seed(2), MatrixXd::Constant(2, 2, 0.5));
  EXPECT_EQ(deadbeat_seed(3), MatrixXd::Constant(3, 3, 1.0 / 3));
  const auto spec = seed_eigenvalues(deadbeat_seed(4));
  int ones = 0, zeros = 0;
  for (auto z : spec.eigenvalues) {
    if (std::abs(z - 1.0) < 1e-12) ++ones;
    if (z == Complex(0.0, 0.0)) ++zeros;
  }
  EXPECT_EQ(ones, 1);
  EXPECT_EQ(zeros, 3);
  EXPECT_THROW(deadbeat_seed(1), DomainError);
}

TEST(MinSteps, Examples) {
  EXPECT_EQ(min_steps_bound(81, 3), 4);
  EXPECT_EQ(min_steps_bound(1, 3), 0);
  EXPECT_EQ(min_steps_bound(1, 100), 0);
  EXPECT_EQ(min_steps_bound(9, 3), 2);
  EXPECT_EQ(min_steps_bound(10, 3), 3);
  EXPECT_EQ(min_steps_bound(1024, 2), 10);
  EXPECT_EQ(min_steps_bound(std::numeric_limits<Index>::max(), 2), 63);
  EXPECT_THROW(min_steps_bound(9, 1), DomainError);
  EXPECT_THROW(min_steps_bound(0, 3), DomainError);
}

TEST(MinSteps, MatchesLogarithm) {
  for (Index nu = 2; nu <= 6; ++nu) {
    for (Index n = 1; n <= 500; ++n) {
      const int k = min_steps_bound(n, nu);
      EXPECT_GE(checked_pow(nu, k), n);
      if (k > 0) EXPECT_LT(checked_pow(nu, k - 1), n);
    }
  }
}

TEST(Family, Names) {
  EXPECT_EQ(to_string(Family::BlockKronecker), "kronecker");
  EXPECT_EQ(parse_family("cayley"), Family::Cayley);
  EXPECT_THROW(parse_family("circulant"), DomainError);
}

TEST(Serialization, KroneckerRoundTrip) {
  const auto dir = scratch_dir("kron");
  Rng rng(50);
  const Strategy s = block_kron_strategy(oracle::random_normal_seed(3, rng), 3);
  save_strategy(s, dir / "strategy.json", dir / "matrix.txt");
  const Strategy t = load_strategy(dir / "strategy.json");
  EXPECT_EQ(t.matrix(), s.matrix());
  EXPECT_EQ(t.family(), Family::BlockKronecker);
  EXPECT_EQ(t.k(), 3);
  EXPECT_EQ(*t.seed(), *s.seed());
  EXPECT_EQ(t.comm_graph(), s.comm_graph());

  std::ifstream is(dir / "strategy.json");
  const auto j = nlohmann::json::parse(is);
  EXPECT_EQ(j.at("family"), "kronecker");
  EXPECT_EQ(j.at("nu"), 3);
  EXPECT_EQ(j.at("matrix_file"), "matrix.txt");
}

TEST(Serialization, CayleyAndCustomRoundTrip) {
  const auto dir = scratch_dir("cayley");
  const Strategy c = cayley_strategy(AbelianGroup({3, 3}), uniform_generator({{0, 0}, {1, 0}, {0, 1}}));
  save_strategy(c, dir / "c.json", dir / "c.txt");
  const Strategy c2 = load_strategy(dir / "c.json");
  EXPECT_EQ(c2.matrix(), c.matrix());
  EXPECT_EQ(*c2.group(), *c.group());

  const Strategy u = custom_strategy(circulant_example(5));
  save_strategy(u, dir / "u.json", dir / "u.txt");
  EXPECT_EQ(load_strategy(dir / "u.json").matrix(), u.matrix());
}

TEST(Serialization, RejectsTampering) {
  const auto dir = scratch_dir("tamper");
  const Strategy s = block_kron_strategy(deadbeat_seed(2), 2);
  save_strategy(s, dir / "s.json", dir / "m.txt");
  MatrixXd other = s.matrix();
  other(1, 2) = 0.25;
  other(1, 3) = 0.75;
  write_matrix(dir / "m.txt", other);
  EXPECT_THROW(load_strategy(dir / "s.json"), IoError);
  other = s.matrix();
  other(0, 0) = 0.25;
  other(0, 1) = 0.75;
  write_matrix(dir / "m.txt", other);
  EXPECT_THROW(load_strategy(dir / "s.json"), ValidationError);
  EXPECT_THROW(load_strategy(dir / "missing.json"), IoError);
  std::ofstream(dir / "bad.json") << "{\"schema\": \"other\"}";
  EXPECT_THROW(load_strategy(dir / "bad.json"), IoError);
  std::ofstream(dir / "junk.json") << "not json";
  EXPECT_THROW(load_strategy(dir / "junk.json"), IoError);
}
