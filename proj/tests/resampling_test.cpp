#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "cket/datagen.hpp"
#include "cket/resampling.hpp"

namespace cket {
namespace {

RegressionFn constant_fn(double c) {
  return [c](PointRef) { return c; };
}

Inputs uniform_inputs(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Inputs x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = u(rng);
  return x;
}

std::vector<std::size_t> random_perm(std::size_t m, std::mt19937_64& rng) {
  std::vector<std::size_t> pi(m);
  std::iota(pi.begin(), pi.end(), 1);
  std::shuffle(pi.begin(), pi.end(), rng);
  return pi;
}

// ---------------------------------------------------------------------------
// resample_labels

TEST(ResampleLabels, DegenerateCandidatesAreDeterministic) {
  std::mt19937_64 gen(1);
  const Inputs x = uniform_inputs(gen, 500);
  Rng rng(2);
  for (int y : resample_labels(x, constant_fn(1.0), rng)) EXPECT_EQ(y, 1);
  for (int y : resample_labels(x, constant_fn(-1.0), rng)) EXPECT_EQ(y, -1);
}

TEST(ResampleLabels, BalancedCandidateConcentrates) {
  // Hoeffding: P(|mean| >= 0.05) <= 2 exp(-10000 * 0.05^2 / 2) ~ 7.5e-6.
  std::mt19937_64 gen(3);
  const Inputs x = uniform_inputs(gen, 10000);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto y = resample_labels(x, constant_fn(0.0), rng);
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 10000.0;
    EXPECT_LE(std::abs(mean), 0.05);
  }
}

TEST(ResampleLabels, FollowsPointwiseProbability) {
  // f = 0.6 everywhere: P(+1) = 0.8, sd of the frequency over 20000 draws ~ 0.0028.
  std::mt19937_64 gen(4);
  const Inputs x = uniform_inputs(gen, 20000);
  Rng rng(5);
  const auto y = resample_labels(x, constant_fn(0.6), rng);
  const double freq = static_cast<double>(std::count(y.begin(), y.end(), 1)) / 20000.0;
  EXPECT_NEAR(freq, 0.8, 0.015);
}

TEST(ResampleLabels, RejectsInvalidCandidate) {
  Rng rng(0);
  EXPECT_THROW(resample_labels(inputs_1d({0.0}), constant_fn(1.2), rng), InvalidCandidateError);
}

TEST(ResampleLabels, UniformsStayInsideOpenInterval) {
  Rng rng(9);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform_open_pm1(rng);
    ASSERT_GT(u, -1.0);
    ASSERT_LT(u, 1.0);
  }
}

// ---------------------------------------------------------------------------
// rank_with_ties

TEST(RankWithTies, StrictOrderingIgnoresPermutation) {
  const std::vector<double> alts{0.1, 0.2, 0.3};
  std::vector<std::size_t> pi{1, 2, 3, 4};
  do {
    EXPECT_EQ(rank_with_ties(0.9, alts, pi), 4u);
  } while (std::next_permutation(pi.begin(), pi.end()));
}

TEST(RankWithTies, TieResolvedByPermutation) {
  const std::vector<double> alts{0.2, 0.7, 0.5};
  const std::vector<std::size_t> pi{2, 4, 1, 3};
  EXPECT_EQ(rank_with_ties(0.5, alts, pi), 3u);
  // Give the tying alternative a larger tag than the original.
  const std::vector<std::size_t> pi2{2, 1, 4, 3};
  EXPECT_EQ(rank_with_ties(0.5, alts, pi2), 2u);
}

TEST(RankWithTies, AllEqualExhaustiveIsUniform) {
  const std::vector<double> alts{0.4, 0.4, 0.4};
  std::vector<std::size_t> pi{1, 2, 3, 4};
  std::vector<int> counts(5, 0);
  int perms = 0;
  do {
    const std::size_t r = rank_with_ties(0.4, alts, pi);
    EXPECT_EQ(r, pi[3]);  // the original's tag rank
    ++counts[r];
    ++perms;
  } while (std::next_permutation(pi.begin(), pi.end()));
  EXPECT_EQ(perms, 24);
  for (int r = 1; r <= 4; ++r) EXPECT_EQ(counts[r], 6);
}

TEST(RankWithTies, RejectsNonPermutations) {
  const std::vector<double> alts{0.1, 0.2};
  EXPECT_THROW(rank_with_ties(0.5, alts, std::vector<std::size_t>{1, 2}), InvalidPermutationError);
  EXPECT_THROW(rank_with_ties(0.5, alts, std::vector<std::size_t>{1, 1, 3}), InvalidPermutationError);
  EXPECT_THROW(rank_with_ties(0.5, alts, std::vector<std::size_t>{0, 1, 2}), InvalidPermutationError);
  EXPECT_THROW(rank_with_ties(0.5, alts, std::vector<std::size_t>{1, 2, 4}), InvalidPermutationError);
}

// Values drawn from a tiny set so that ties are common.
std::vector<double> tie_prone_values(std::size_t m, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> v(0, 3);
  std::vector<double> z(m);
  for (auto& x : z) x = 0.25 * v(rng);
  return z;
}

TEST(RankingAxioms, ReorderInvariance) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = 2 + t % 12;
    const auto z = t % 2 ? tie_prone_values(m, rng) : std::vector<double>();
    std::vector<double> values = z;
    if (values.empty()) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      values.resize(m);
      for (auto& x : values) x = u(rng);
    }
    const auto pi = random_perm(m, rng);
    const std::vector<double> alts(values.begin() + 1, values.end());
    const std::size_t base = rank_with_ties(values[0], alts, pi);

    std::vector<std::size_t> order(m - 1);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> alts2(m - 1);
    std::vector<std::size_t> pi2(m);
    for (std::size_t j = 0; j + 1 < m; ++j) {
      alts2[j] = alts[order[j]];
      pi2[j] = pi[order[j]];
    }
    pi2[m - 1] = pi[m - 1];
    EXPECT_EQ(rank_with_ties(values[0], alts2, pi2), base);
  }
}

TEST(RankingAxioms, DistinctRanks) {
  std::mt19937_64 rng(103);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = 2 + t % 12;
    const auto z = tie_prone_values(m, rng);
    // tags[k] is the permutation value attached to dataset k.
    const auto tags = random_perm(m, rng);
    std::set<std::size_t> ranks;
    for (std::size_t i = 0; i < m; ++i) ranks.insert(tagged_rank(i, z, tags));
    EXPECT_EQ(ranks.size(), m);
    EXPECT_EQ(*ranks.begin(), 1u);
    EXPECT_EQ(*ranks.rbegin(), m);

    // Dataset 0 as the original: rank_with_ties sees alternatives 1..m-1 with
    // tags pi(1..m-1) and the original's tag in the last slot.
    std::vector<std::size_t> pi(tags.begin() + 1, tags.end());
    pi.push_back(tags[0]);
    const std::vector<double> alts(z.begin() + 1, z.end());
    EXPECT_EQ(rank_with_ties(z[0], alts, pi), tagged_rank(0, z, tags));
  }
}

TEST(RankingAxioms, ExhaustiveTiesAtMFour) {
  const std::vector<double> z{0.5, 0.5, 0.2, 0.5};
  std::vector<std::size_t> tags{1, 2, 3, 4};
  do {
    std::set<std::size_t> ranks;
    for (std::size_t i = 0; i < 4; ++i) ranks.insert(tagged_rank(i, z, tags));
    EXPECT_EQ(ranks, (std::set<std::size_t>{1, 2, 3, 4}));
    EXPECT_EQ(tagged_rank(2, z, tags), 1u);
  } while (std::next_permutation(tags.begin(), tags.end()));
}

TEST(DrawPermutation, IsPermutationAndUniform) {
  Rng rng(77);
  std::vector<std::vector<int>> counts(4, std::vector<int>(5, 0));
  const int draws = 24000;
  for (int t = 0; t < draws; ++t) {
    const auto pi = draw_permutation(4, rng);
    check_permutation(pi, 4);
    for (std::size_t pos = 0; pos < 4; ++pos) ++counts[pos][pi[pos]];
  }
  // Each (position, value) cell has mean 6000 and sd ~67.
  for (std::size_t pos = 0; pos < 4; ++pos)
    for (int v = 1; v <= 4; ++v) EXPECT_NEAR(counts[pos][v], 6000, 400);
}

// ---------------------------------------------------------------------------
// run_test

TestConfig small_config(EstimatorKind kind, std::size_t m = 10) {
  TestConfig cfg;
  cfg.m = m;
  cfg.p_lo = 1;
  cfg.q_hi = m - 1;
  cfg.estimator = kind;
  cfg.seed = 1234;
  return cfg;
}

LabeledSample model_sample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_dataset(MixtureParams{}, n, rng);
}

TEST(RunTest, FullAcceptanceRegionAlwaysAccepts) {
  TestConfig cfg = small_config(EstimatorKind::Pet, 2);
  cfg.q_hi = 2;
  const auto s = model_sample(30, 1);
  const auto far = regression_fn(candidate_params(0.2, 0.5));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    cfg.seed = seed;
    EXPECT_TRUE(run_test(s, far, cfg).accepted);
  }
}

TEST(RunTest, DegenerateSinglePointIsPermutationUniform) {
  const LabeledSample s(inputs_1d({0.3}), {1});
  for (auto kind : {EstimatorKind::Pet, EstimatorKind::Vvkt}) {
    TestConfig cfg = small_config(kind, 5);
    cfg.k_neighbors = 1;
    std::vector<int> counts(6, 0);
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      cfg.seed = seed;
      const auto out = run_test(s, constant_fn(1.0), cfg);
      for (double z : out.z_values) EXPECT_EQ(z, out.z_values[0]);
      if (kind == EstimatorKind::Pet) EXPECT_EQ(out.z_values[0], 0.0);
      EXPECT_EQ(out.rank, out.permutation.back());
      ++counts[out.rank];
    }
    for (int r = 1; r <= 5; ++r) EXPECT_GT(counts[r], 60);
  }
}

TEST(RunTest, DegenerateNegativeCandidate) {
  const LabeledSample s(inputs_1d({-0.5, 0.0, 0.5}), {-1, -1, -1});
  TestConfig cfg = small_config(EstimatorKind::Vvkt, 6);
  const auto out = run_test(s, constant_fn(-1.0), cfg);
  for (double z : out.z_values) EXPECT_EQ(z, out.z_values[0]);
  EXPECT_EQ(out.rank, out.permutation.back());
}

TEST(RunTest, Deterministic) {
  const auto s = model_sample(40, 9);
  const auto f = regression_fn(candidate_params(0.4, 1.2));
  for (auto kind : {EstimatorKind::Pet, EstimatorKind::Vvkt}) {
    const TestConfig cfg = small_config(kind);
    const auto a = run_test(s, f, cfg);
    const auto b = run_test(s, f, cfg);
    EXPECT_EQ(a.rank, b.rank);
    EXPECT_EQ(a.accepted, b.accepted);
    EXPECT_EQ(a.z_values, b.z_values);
    EXPECT_EQ(a.permutation, b.permutation);
  }
}

TEST(RunTest, OutcomeIsConsistent) {
  const auto s = model_sample(40, 10);
  const auto f = regression_fn(MixtureParams{});
  for (auto kind : {EstimatorKind::Pet, EstimatorKind::Vvkt}) {
    TestConfig cfg = small_config(kind, 8);
    cfg.p_lo = 2;
    cfg.q_hi = 6;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      cfg.seed = seed;
      const auto out = run_test(s, f, cfg);
      ASSERT_EQ(out.z_values.size(), 8u);
      check_permutation(out.permutation, 8);
      EXPECT_EQ(out.rank, rank_with_ties(out.z_values[0],
                                         std::vector<double>(out.z_values.begin() + 1,
                                                             out.z_values.end()),
                                         out.permutation));
      EXPECT_EQ(out.accepted, out.rank >= 2 && out.rank <= 6);
      for (double z : out.z_values) EXPECT_GE(z, 0.0);
    }
  }
}

TEST(RunTest, OriginalReferenceVariableMatchesDirectComputation) {
  const auto s = model_sample(35, 12);
  const auto f = regression_fn(candidate_params(0.35, 0.9));

  TestConfig cfg = small_config(EstimatorKind::Vvkt);
  const auto vvkt = run_test(s, f, cfg);
  const VvktModel model = fit_vvkt(s, cfg.kernel, cfg.lambda_for(s.size()));
  EXPECT_NEAR(vvkt.z_values[0],
              reference_variable(s.inputs(), f, [&](PointRef x) { return model(x); }), 1e-12);

  cfg.estimator = EstimatorKind::Pet;
  const auto pet = run_test(s, f, cfg);
  KnnEstimator knn(cfg.k_for(s.size()));
  knn.fit(s);
  EXPECT_EQ(pet.z_values[0],
            reference_variable(s.inputs(), f, [&](PointRef x) { return pet_mean_map(knn, x); }));
}

TEST(RunTest, VvktBatchMatchesPerDatasetFits) {
  const auto s = model_sample(25, 13);
  const auto f = regression_fn(MixtureParams{});
  Rng rng(14);
  std::vector<std::vector<int>> sets{s.labels()};
  for (int j = 0; j < 5; ++j) sets.push_back(resample_labels(s.inputs(), f, rng));
  const KernelSpec kernel{};
  const auto z = vvkt_reference_variables(s.inputs(), candidate_probabilities(s.inputs(), f), sets,
                                          kernel, 0.3);
  for (std::size_t j = 0; j < sets.size(); ++j) {
    const VvktModel model = fit_vvkt(s.with_labels(sets[j]), kernel, 0.3);
    EXPECT_NEAR(z[j], reference_variable(s.inputs(), f, [&](PointRef x) { return model(x); }),
                1e-12);
  }
}

TEST(RunTest, CustomEstimatorFactory) {
  // An estimator that ignores the data and reports p = 0.5 makes every Z equal.
  struct Flat final : ProbEstimator {
    void fit(const LabeledSample&) override {}
    double predict(PointRef) const override { return 0.5; }
  };
  const auto s = model_sample(20, 15);
  TestConfig cfg = small_config(EstimatorKind::Pet);
  const auto out = run_test(s, regression_fn(MixtureParams{}), cfg,
                            [] { return std::make_unique<Flat>(); });
  for (double z : out.z_values) EXPECT_EQ(z, out.z_values[0]);
  EXPECT_EQ(out.rank, out.permutation.back());
}

TEST(RunTest, ConfigValidation) {
  const auto s = model_sample(10, 16);
  const auto f = regression_fn(MixtureParams{});
  TestConfig cfg;
  cfg.m = 1;
  EXPECT_THROW(run_test(s, f, cfg), ConfigError);
  cfg = TestConfig{};
  cfg.p_lo = 0;
  EXPECT_THROW(run_test(s, f, cfg), ConfigError);
  cfg = TestConfig{};
  cfg.q_hi = 41;
  EXPECT_THROW(run_test(s, f, cfg), ConfigError);
  cfg = TestConfig{};
  cfg.p_lo = 5;
  cfg.q_hi = 4;
  EXPECT_THROW(run_test(s, f, cfg), ConfigError);
  cfg = TestConfig{};
  cfg.lambda = -1.0;
  EXPECT_THROW(run_test(s, f, cfg), InvalidRegularizationError);
  cfg = TestConfig{};
  cfg.k_neighbors = 11;
  EXPECT_THROW(run_test(s, f, cfg), InvalidHyperparameterError);
  EXPECT_THROW(run_test(LabeledSample(), f, TestConfig{}), EmptyInputError);
  EXPECT_THROW(run_test(s, constant_fn(2.0), TestConfig{}), InvalidCandidateError);
}

TEST(TestConfig, AcceptanceProbability) {
  TestConfig cfg;
  cfg.m = 40;
  cfg.p_lo = 1;
  cfg.q_hi = 38;
  EXPECT_DOUBLE_EQ(cfg.acceptance_probability(), 0.95);
  cfg.m = 2;
  cfg.q_hi = 1;
  EXPECT_DOUBLE_EQ(cfg.acceptance_probability(), 0.5);
}

TEST(LabeledSample, Validation) {
  EXPECT_THROW(LabeledSample(inputs_1d({0.0, 1.0}), {1}), InputShapeError);
  EXPECT_THROW(LabeledSample(inputs_1d({0.0}), {0}), InvalidLabelError);
}

}  // namespace
}  // namespace cket
