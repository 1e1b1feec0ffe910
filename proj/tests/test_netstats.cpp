#include <gtest/gtest.h>

#include <random>

#include "nullnet/netstats.hpp"
#include "nullnet/solver.hpp"
#include "oracles.hpp"

using namespace nullnet;

namespace {

void expect_same(const std::vector<MaybeValue>& a, const std::vector<std::optional<double>>& b, double rel) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].has_value(), b[i].has_value()) << i;
    if (a[i]) {
      EXPECT_NEAR(*a[i], *b[i], rel * std::max(1.0, std::abs(*b[i]))) << i;
    }
  }
}

ModelParams complete_params(std::size_t n, double y) {
  // x = 0 would remove links; here p_ij -> 1 is forced with a huge x.
  ModelParams p;
  p.kind = ModelKind::ecm;
  p.nodes = WeightedGraph::default_labels(n);
  p.x.assign(n, 1e150);
  p.y.assign(n, y);
  return p;
}

}  // namespace

TEST(ObservedStats, MatchesDefinitionSums) {
  std::mt19937_64 rng(61);
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = oracle::random_graph(rng, 3 + rep % 12);
    const auto st = observed_stats(g);
    const auto ref = oracle::observed(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_EQ(st.degree[i], ref.k[i]);
      EXPECT_EQ(st.strength[i], ref.s[i]);
    }
    expect_same(st.annd, ref.knn, 1e-13);
    expect_same(st.clustering, ref.c, 1e-13);
    expect_same(st.anns, ref.snn, 1e-13);
    expect_same(st.weighted_clustering, ref.cw, 1e-13);
  }
}

TEST(ObservedStats, Definedness) {
  // Path 0-1-2 plus isolated 3: node 0 has k=1, node 3 has k=0.
  const auto g = WeightedGraph::from_edges(4, {{0, 1, 2}, {1, 2, 5}});
  const auto st = observed_stats(g);
  EXPECT_TRUE(st.annd[0].has_value());
  EXPECT_FALSE(st.clustering[0].has_value());
  EXPECT_FALSE(st.annd[3].has_value());
  EXPECT_FALSE(st.anns[3].has_value());
  ASSERT_TRUE(st.clustering[1].has_value());
  EXPECT_EQ(*st.clustering[1], 0.0);
  EXPECT_EQ(*st.annd[1], 1.0);
  EXPECT_EQ(*st.anns[0], 7.0);
}

TEST(ObservedStats, TriangleWithWeights) {
  const auto g = WeightedGraph::from_edges(3, {{0, 1, 1}, {1, 2, 8}, {0, 2, 27}});
  const auto st = observed_stats(g);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(*st.clustering[i], 1.0);
    EXPECT_NEAR(*st.weighted_clustering[i], 6.0, 1e-12);  // cbrt(1*8*27)
  }
}

TEST(ExpectedStats, MatchesTripleSumOracle) {
  std::mt19937_64 rng(67);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 2 + rep % 7;
    const auto p = oracle::random_params(rng, n, rep % 3 == 0 ? ModelKind::wcm : ModelKind::ecm);
    const auto st = expected_stats(p);
    const auto ref = oracle::expected(p);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(st.degree[i], ref.k[i], 1e-12);
      EXPECT_NEAR(st.strength[i], ref.s[i], 1e-10 * std::max(1.0, ref.s[i]));
    }
    expect_same(st.annd, ref.knn, 1e-10);
    expect_same(st.clustering, ref.c, 1e-10);
    expect_same(st.anns, ref.snn, 1e-10);
    expect_same(st.weighted_clustering, ref.cw, 1e-10);
    EXPECT_EQ(st.model, p.kind);
  }
}

TEST(ExpectedStats, CompleteNetworkLimit) {
  const std::size_t n = 20;
  const auto p = complete_params(n, 0.6);
  const auto st = expected_stats(p);
  const double pair_mean = expected_weight(p, 0, 1);
  const double w_tot = pair_mean * n * (n - 1) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_DOUBLE_EQ(st.degree[i], 19.0);
    EXPECT_DOUBLE_EQ(*st.annd[i], 19.0);
    EXPECT_DOUBLE_EQ(*st.clustering[i], 1.0);
    // Neighbours of i carry every strength but its own.
    EXPECT_NEAR(*st.anns[i], (2.0 * w_tot - st.strength[i]) / 19.0, 1e-12 * w_tot);
  }
}

TEST(ExpectedStats, IsolatedNodeUndefined) {
  std::mt19937_64 rng(71);
  auto p = oracle::random_params(rng, 5);
  p.x[2] = 0.0;
  p.y[2] = 0.0;
  const auto st = expected_stats(p);
  EXPECT_FALSE(st.annd[2].has_value());
  EXPECT_FALSE(st.clustering[2].has_value());
  EXPECT_TRUE(st.annd[0].has_value());
}

TEST(ExpectedStats, FittedRingReproducesObservedHomogeneousValues) {
  std::vector<WeightedGraph::Edge> e;
  for (std::size_t i = 0; i < 10; ++i) e.push_back({i, (i + 1) % 10, 3});
  const auto g = WeightedGraph::from_edges(10, e);
  const auto st = expected_stats(fit(g, ModelKind::ecm));
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_NEAR(st.degree[i], 2.0, 1e-6);
    EXPECT_NEAR(st.strength[i], 6.0, 1e-5);
    EXPECT_NEAR(*st.annd[i], 2.0, 1e-6);  // homogeneous: knn = k
  }
}

TEST(NodeStatistics, ScaledWeightsOnlyTouchWeightedQuantities) {
  std::mt19937_64 rng(73);
  const auto st = observed_stats(oracle::random_graph(rng, 8));
  const auto sc = st.scaled_weights(0.5);
  EXPECT_EQ(sc.degree, st.degree);
  EXPECT_EQ(sc.annd, st.annd);
  EXPECT_EQ(sc.clustering, st.clustering);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(sc.strength[i], 0.5 * st.strength[i]);
    if (st.anns[i]) {
      EXPECT_EQ(*sc.anns[i], 0.5 * *st.anns[i]);
    }
  }
}

TEST(PanelSummary, MeanStdAndCorrelations) {
  const std::vector<MaybeValue> v = {1.0, 2.0, std::nullopt, 3.0};
  const std::vector<MaybeValue> k = {2.0, 4.0, 5.0, 6.0};
  const std::vector<MaybeValue> e = {3.0, 2.0, 1.0, 1.0};
  const auto s = panel_summary(v, k, e);
  EXPECT_EQ(s.defined, 3u);
  EXPECT_DOUBLE_EQ(*s.mean, 2.0);
  EXPECT_NEAR(*s.std_dev, std::sqrt(2.0 / 3.0), 1e-15);  // population convention
  EXPECT_NEAR(*s.corr_constraint, 1.0, 1e-15);
  EXPECT_NEAR(*s.corr_expected, -1.0, 1e-15);
}

TEST(PanelSummary, DegenerateLists) {
  const std::vector<MaybeValue> one = {1.0, std::nullopt};
  const auto s = panel_summary(one, {1.0, 2.0}, {1.0, 2.0});
  EXPECT_FALSE(s.valid());
  const std::vector<MaybeValue> flat = {1.0, 1.0, 1.0};
  const auto t = panel_summary(flat, {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
  EXPECT_TRUE(t.valid());
  EXPECT_FALSE(t.corr_constraint.has_value());
  EXPECT_THROW(panel_summary(flat, {1.0}, {1.0}), InputError);
}
