#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <random>

#include "nullnet/sampler.hpp"
#include "nullnet/solver.hpp"
#include "oracles.hpp"

using namespace nullnet;

namespace {

ModelParams pair_params(double u, double v) {
  ModelParams p;
  p.kind = ModelKind::ecm;
  p.nodes = {"a", "b"};
  p.x = {u, 1.0};
  p.y = {v, 1.0};
  return p;
}

/// Chi-square statistic of `draws` weights against the pmf, bins 0..5 plus tail.
double chi_square(const PairState& st, const std::vector<std::size_t>& counts, std::size_t total) {
  double chi = 0.0, tail = 1.0;
  for (std::size_t w = 0; w < 6; ++w) {
    const double q = st.pmf(static_cast<std::int64_t>(w));
    tail -= q;
    const double e = q * static_cast<double>(total);
    chi += (counts[w] - e) * (counts[w] - e) / e;
  }
  const double e = tail * static_cast<double>(total);
  chi += (counts[6] - e) * (counts[6] - e) / e;
  return chi;
}

}  // namespace

TEST(SplitMix64, UniformInUnitInterval) {
  SplitMix64 g(0);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = g.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    mean += u;
  }
  EXPECT_NEAR(mean / 100000.0, 0.5, 0.005);
}

TEST(PairStream, SymmetricInPairAndDistinctAcrossKeys) {
  auto a = pair_stream(1, 2, 3, 4);
  auto b = pair_stream(1, 2, 4, 3);
  EXPECT_EQ(a(), b());
  EXPECT_NE(pair_stream(1, 2, 3, 4)(), pair_stream(1, 3, 3, 4)());
  EXPECT_NE(pair_stream(1, 2, 3, 4)(), pair_stream(2, 2, 3, 4)());
  EXPECT_NE(pair_stream(1, 2, 3, 4)(), pair_stream(1, 2, 3, 5)());
}

TEST(SampleGraph, AllXZeroGivesEmptyGraph) {
  std::mt19937_64 rng(1);
  auto p = oracle::random_params(rng, 6);
  std::fill(p.x.begin(), p.x.end(), 0.0);
  for (std::uint64_t m = 0; m < 50; ++m) EXPECT_EQ(sample_graph(p, 9, m).total_weight(), 0);
}

TEST(SampleGraph, ZeroContinuationIsBernoulli) {
  std::size_t ones = 0;
  for (std::uint64_t m = 0; m < 20000; ++m) {
    auto r = pair_stream(5, m, 0, 1);
    const auto w = sample_pair_weight(0.3, 0.0, r);
    ASSERT_LE(w, 1);
    ones += static_cast<std::size_t>(w);
  }
  const double se = std::sqrt(0.3 * 0.7 / 20000.0);
  EXPECT_NEAR(ones / 20000.0, 0.3, 4 * se);
}

TEST(SampleGraph, WorkedFrequencies) {
  const auto p = pair_params(2.0, 0.5);  // q = (1/3, 1/3, 1/6, ...)
  const std::size_t n = 200000;
  std::vector<std::size_t> counts(7, 0);
  for (std::uint64_t m = 0; m < n; ++m) ++counts[std::min<std::size_t>(sample_graph(p, 3, m).weight(0, 1), 6)];
  const double expected[] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
  for (int w = 0; w < 3; ++w) {
    const double se = std::sqrt(expected[w] * (1 - expected[w]) / n);
    EXPECT_NEAR(counts[w] / static_cast<double>(n), expected[w], 3.5 * se) << w;
  }
}

TEST(SampleGraph, ChiSquareOnRandomParams) {
  std::mt19937_64 rng(83);
  const std::size_t n = 100000;
  const double critical = boost::math::quantile(boost::math::complement(boost::math::chi_squared(6.0), 0.01));
  int failures = 0;
  for (int rep = 0; rep < 8; ++rep) {
    const auto p = oracle::random_params(rng, 2);
    const auto st = pair_state(p, 0, 1);
    std::vector<std::size_t> counts(7, 0);
    for (std::uint64_t m = 0; m < n; ++m) ++counts[std::min<std::size_t>(sample_graph(p, rep, m).weight(0, 1), 6)];
    // Skip bins with tiny expected counts by requiring enough mass in each.
    bool ok = true;
    for (std::size_t w = 0; w < 6; ++w) ok = ok && st.pmf(static_cast<std::int64_t>(w)) * n >= 5;
    if (!ok) continue;
    if (chi_square(st, counts, n) > critical) ++failures;
  }
  EXPECT_LE(failures, 1);  // 8 tests at the 1% level
}

TEST(SampleGraph, MeansConvergeToExpectations) {
  std::mt19937_64 rng(89);
  const auto p = oracle::random_params(rng, 4);
  const std::size_t n = 40000;
  SquareMatrix<double> sum(4), sum_sq(4), links(4);
  for (std::uint64_t m = 0; m < n; ++m) {
    const auto g = sample_graph(p, 11, m);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) {
        const double w = static_cast<double>(g.weight(i, j));
        sum(i, j) += w;
        sum_sq(i, j) += w * w;
        links(i, j) += w > 0 ? 1.0 : 0.0;
      }
  }
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      const double mean = sum(i, j) / n;
      const double var = sum_sq(i, j) / n - mean * mean;
      EXPECT_NEAR(mean, expected_weight(p, i, j), 3.5 * std::sqrt(var / n) + 1e-12);
      const double pij = connection_probability(p, i, j);
      EXPECT_NEAR(links(i, j) / n, pij, 3.5 * std::sqrt(pij * (1 - pij) / n) + 1e-12);
    }
}

TEST(SampleGraph, ReproducibleAndThreadIndependent) {
  std::mt19937_64 rng(97);
  const auto p = oracle::random_params(rng, 10);
  EXPECT_EQ(sample_graph(p, 4, 7), sample_graph(p, 4, 7));
  EXPECT_NE(sample_graph(p, 4, 7), sample_graph(p, 4, 8));
  const NodeStatistic degrees = [](const WeightedGraph& g) {
    const auto c = local_constraints(g);
    std::vector<std::optional<double>> out;
    for (auto k : c.degrees) out.push_back(static_cast<double>(k));
    return out;
  };
  SampleConfig one{200, 42, 0.05, 1}, many{200, 42, 0.05, 5};
  const auto a = ensemble_interval(p, degrees, one);
  const auto b = ensemble_interval(p, degrees, many);
  for (std::size_t i = 0; i < 10; ++i) {
    ASSERT_TRUE(a[i] && b[i]);
    EXPECT_EQ(a[i]->low, b[i]->low);
    EXPECT_EQ(a[i]->high, b[i]->high);
  }
}

TEST(EnsembleInterval, PointMassGivesZeroWidth) {
  std::mt19937_64 rng(101);
  auto p = oracle::random_params(rng, 5);
  std::fill(p.x.begin(), p.x.end(), 0.0);
  const NodeStatistic strengths = [](const WeightedGraph& g) {
    const auto c = local_constraints(g);
    std::vector<std::optional<double>> out;
    for (auto s : c.strengths) out.push_back(static_cast<double>(s));
    return out;
  };
  for (const auto& ci : ensemble_interval(p, strengths, {100, 1, 0.05, 2})) {
    ASSERT_TRUE(ci);
    EXPECT_EQ(ci->low, 0.0);
    EXPECT_EQ(ci->high, 0.0);
  }
}

TEST(EnsembleInterval, UndefinedWhenMostlyMissing) {
  std::vector<std::optional<double>> draws(10, std::nullopt);
  draws[0] = 1.0;
  EXPECT_FALSE(percentile_interval(draws, 0.05));
  for (int i = 0; i < 5; ++i) draws[i] = i;
  EXPECT_TRUE(percentile_interval(draws, 0.05));
}

TEST(EnsembleInterval, RequiresEnoughSamples) {
  std::mt19937_64 rng(103);
  const auto p = oracle::random_params(rng, 3);
  const NodeStatistic none = [](const WeightedGraph& g) { return std::vector<std::optional<double>>(g.size()); };
  EXPECT_THROW(ensemble_interval(p, none, {50, 0, 0.05, 1}), InputError);
  EXPECT_THROW(ensemble_interval(p, none, {100, 0, 1.5, 1}), InputError);
}

TEST(EnsembleInterval, DegreeCoverageOnFittedModel) {
  std::mt19937_64 rng(107);
  const auto g = oracle::random_graph(rng, 30);
  const auto p = fit(g, ModelKind::ecm);
  const NodeStatistic degrees = [](const WeightedGraph& h) {
    const auto c = local_constraints(h);
    std::vector<std::optional<double>> out;
    for (auto k : c.degrees) out.push_back(static_cast<double>(k));
    return out;
  };
  const auto cis = ensemble_interval(p, degrees, {1000, 5, 0.05, 4});
  const auto c = local_constraints(g);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < 30; ++i)
    if (cis[i] && cis[i]->low <= c.degrees[i] && c.degrees[i] <= cis[i]->high) ++covered;
  EXPECT_GE(covered, 27u);
}

TEST(EnsembleInterval, StableWhenSamplesDouble) {
  std::mt19937_64 rng(109);
  const auto p = oracle::random_params(rng, 8);
  const NodeStatistic strengths = [](const WeightedGraph& h) {
    const auto c = local_constraints(h);
    std::vector<std::optional<double>> out;
    for (auto s : c.strengths) out.push_back(static_cast<double>(s));
    return out;
  };
  const auto a = ensemble_interval(p, strengths, {2000, 3, 0.05, 4});
  const auto b = ensemble_interval(p, strengths, {4000, 3, 0.05, 4});
  for (std::size_t i = 0; i < 8; ++i) {
    const double width = a[i]->high - a[i]->low;
    EXPECT_NEAR(a[i]->low, b[i]->low, 0.15 * width + 1.0);
    EXPECT_NEAR(a[i]->high, b[i]->high, 0.15 * width + 1.0);
  }
}

TEST(Quantile, TypeSevenInterpolation) {
  const std::vector<double> v = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.25), 1.75);
}
