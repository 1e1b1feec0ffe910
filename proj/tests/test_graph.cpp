#include <gtest/gtest.h>

#include <random>

#include "nullnet/dataset.hpp"
#include "nullnet/graph.hpp"
#include "oracles.hpp"

using namespace nullnet;

namespace {

SquareMatrix<Weight> matrix(std::initializer_list<std::initializer_list<Weight>> rows) {
  SquareMatrix<Weight> m(rows.size());
  std::size_t i = 0;
  for (auto r : rows) {
    std::size_t j = 0;
    for (auto v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST(WeightedGraph, RejectsAsymmetricNegativeAndDiagonal) {
  EXPECT_THROW(WeightedGraph(matrix({{0, 1}, {2, 0}})), InputError);
  EXPECT_THROW(WeightedGraph(matrix({{0, -1}, {-1, 0}})), InputError);
  EXPECT_THROW(WeightedGraph(matrix({{1, 0}, {0, 0}})), InputError);
  EXPECT_THROW(WeightedGraph({"a"}, matrix({{0, 1}, {1, 0}})), InputError);
}

TEST(WeightedGraph, DegreesStrengthsAndTotal) {
  const WeightedGraph g(matrix({{0, 3, 0, 1}, {3, 0, 2, 0}, {0, 2, 0, 0}, {1, 0, 0, 0}}));
  const auto c = local_constraints(g);
  EXPECT_EQ(c.degrees, (std::vector<std::int64_t>{2, 2, 1, 1}));
  EXPECT_EQ(c.strengths, (std::vector<Weight>{4, 5, 2, 1}));
  EXPECT_EQ(g.total_weight(), 6);
  EXPECT_EQ(g.nodes(), (std::vector<std::string>{"0", "1", "2", "3"}));
}

TEST(WeightedGraph, IsolatedNode) {
  const WeightedGraph g(matrix({{0, 1, 0}, {1, 0, 0}, {0, 0, 0}}));
  const auto c = local_constraints(g);
  EXPECT_TRUE(c.isolated(2));
  EXPECT_FALSE(c.isolated(0));
}

TEST(WeightedGraph, FromEdges) {
  const auto g = WeightedGraph::from_edges(3, {{0, 1, 2}, {1, 2, 5}});
  EXPECT_EQ(g.weight(1, 0), 2);
  EXPECT_EQ(g.weight(2, 1), 5);
  EXPECT_EQ(g.weight(0, 2), 0);
}

TEST(SymmetrizeAndRound, MeanOfTwoFlowsRoundedHalfAwayFromZero) {
  SquareMatrix<double> f(3);
  f(0, 1) = 2.0;
  f(1, 0) = 3.0;  // mean 2.5 -> 3
  f(0, 2) = 0.4;  // mean 0.2 -> 0
  f(1, 2) = 3.0;
  f(2, 1) = 4.0;  // mean 3.5 -> 4
  const auto g = symmetrize_and_round(f, {"a", "b", "c"});
  EXPECT_EQ(g.weight(0, 1), 3);
  EXPECT_EQ(g.weight(1, 0), 3);
  EXPECT_EQ(g.weight(0, 2), 0);
  EXPECT_EQ(g.weight(1, 2), 4);
  EXPECT_EQ(g.nodes()[2], "c");
}

TEST(SymmetrizeAndRound, LargeTradeValuesKeepFifteenDigits) {
  SquareMatrix<double> f(2);
  f(0, 1) = 5.67e11;
  f(1, 0) = 5.67e11 + 2.0;
  const auto g = symmetrize_and_round(f);
  EXPECT_EQ(g.weight(0, 1), 567000000001LL);
}

TEST(SymmetrizeAndRound, RejectsBadInput) {
  SquareMatrix<double> f(2);
  f(0, 1) = -1.0;
  EXPECT_THROW(symmetrize_and_round(f), InputError);
  f(0, 1) = std::nan("");
  EXPECT_THROW(symmetrize_and_round(f), InputError);
  f(0, 1) = 0.0;
  f(0, 0) = 1.0;
  EXPECT_THROW(symmetrize_and_round(f), InputError);
}

TEST(SymmetrizeAndRound, ResultIsAlwaysSymmetric) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int rep = 0; rep < 20; ++rep) {
    SquareMatrix<double> f(7);
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j)
        if (i != j) f(i, j) = u(rng);
    const auto g = symmetrize_and_round(f);
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(g.weight(i, j), g.weight(j, i));
  }
}

TEST(NormalizeTotalWeight, SumsToOneOverPairs) {
  std::mt19937_64 rng(5);
  const auto g = oracle::random_graph(rng, 12);
  const auto nw = normalize_total_weight(g);
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j) sum += nw.weights(i, j);
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(nw.total_weight, g.total_weight());
}

TEST(NormalizeTotalWeight, EmptyGraphIsDegenerate) {
  EXPECT_THROW(normalize_total_weight(WeightedGraph(SquareMatrix<Weight>(4))), DegenerateInputError);
}

// ------------------------------------------------------------ datasets

namespace {

MultiplexDataset small_dataset() {
  std::map<MultiplexDataset::CellKey, std::vector<Flow>> cells;
  cells[{2000, "09"}] = {{0, 1, 1.0}, {1, 2, 2.0}};
  cells[{2000, "84"}] = {{0, 1, 10.0}, {2, 0, 4.0}};
  cells[{2001, "84"}] = {{1, 0, 7.0}};
  return MultiplexDataset({"A", "B", "C"}, cells);
}

}  // namespace

TEST(MultiplexDataset, YearsLayersAndLookup) {
  const auto d = small_dataset();
  EXPECT_EQ(d.years(), (std::vector<Year>{2000, 2001}));
  EXPECT_EQ(d.layers(), (std::vector<std::string>{"09", "84"}));
  EXPECT_EQ(d.resolve_layer("9"), "09");
  EXPECT_EQ(d.resolve_layer("084"), "84");
  EXPECT_THROW(d.resolve_layer("93"), LookupError);
  EXPECT_THROW(d.flows(2001, "09"), LookupError);
  EXPECT_THROW(d.flows(1999, "84"), LookupError);
}

TEST(MultiplexDataset, RejectsBadFlows) {
  std::map<MultiplexDataset::CellKey, std::vector<Flow>> cells;
  cells[{2000, "1"}] = {{0, 0, 1.0}};
  EXPECT_THROW(MultiplexDataset({"A"}, cells), InputError);
  cells[{2000, "1"}] = {{0, 5, 1.0}};
  EXPECT_THROW(MultiplexDataset({"A", "B"}, cells), InputError);
  cells[{2000, "1"}] = {{0, 1, -1.0}};
  EXPECT_THROW(MultiplexDataset({"A", "B"}, cells), InputError);
}

TEST(AggregateLayers, SubsetSumAndEmptyMeansAll) {
  const auto d = small_dataset();
  const auto all = aggregate_layers(d, 2000, {});
  EXPECT_DOUBLE_EQ(all(0, 1), 11.0);
  EXPECT_DOUBLE_EQ(all(1, 2), 2.0);
  EXPECT_DOUBLE_EQ(all(2, 0), 4.0);
  const auto one = aggregate_layers(d, 2000, {"84"});
  EXPECT_DOUBLE_EQ(one(0, 1), 10.0);
  EXPECT_DOUBLE_EQ(one(1, 2), 0.0);
  // Duplicate codes count once.
  const auto dup = aggregate_layers(d, 2000, {"84", "84"});
  EXPECT_EQ(dup, one);
  EXPECT_THROW(aggregate_layers(d, 1990, {}), LookupError);
  EXPECT_THROW(aggregate_layers(d, 2000, {"93"}), LookupError);
}

TEST(AggregateLayers, EmptyDatasetRejected) {
  EXPECT_THROW(aggregate_layers(MultiplexDataset({"A"}, {}), 2000, {}), LookupError);
}

TEST(Top14, FourteenDistinctCodes) {
  const auto t = top14_layers();
  EXPECT_EQ(t.size(), 14u);
  EXPECT_EQ(std::set<std::string>(t.begin(), t.end()).size(), 14u);
}
