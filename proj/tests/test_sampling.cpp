#include <algorithm>
#include <random>
#include <tuple>

#include <gtest/gtest.h>

#include "support.hpp"
#include "tempograph/sampling.hpp"

using namespace tempograph;

namespace {

struct Nbr {
  Timestamp t;
  EdgeId id;
  NodeId node;
};

// Every interaction of u strictly before t, from the raw event list.
std::vector<Nbr> scan(const std::vector<Event>& events, NodeId u, Timestamp t) {
  std::vector<Nbr> out;
  for (const auto& e : events) {
    if (!(e.t < t)) continue;
    if (e.src == u) out.push_back({e.t, e.edge_id, e.dst});
    if (e.dst == u) out.push_back({e.t, e.edge_id, e.src});
  }
  return out;
}

TemporalGraph chain_graph(std::vector<Timestamp> times) {
  EventStream s;
  s.num_nodes = static_cast<std::int64_t>(times.size()) + 1;
  for (std::size_t i = 0; i < times.size(); ++i) {
    s.events.push_back({0, static_cast<NodeId>(i + 1), times[i], static_cast<EdgeId>(i)});
  }
  return build_tcsr(s);
}

std::vector<SampleQuery> random_queries(std::mt19937_64& rng, std::int64_t n, std::int64_t count, int max_t) {
  std::uniform_int_distribution<NodeId> node(0, n - 1);
  std::uniform_real_distribution<double> time(0.0, max_t + 2.0);
  std::vector<SampleQuery> q(static_cast<std::size_t>(count));
  for (auto& x : q) x = {node(rng), std::floor(time(rng) * 2.0) / 2.0};
  return q;
}

}  // namespace

TEST(Neighborhood, StrictBound) {
  const auto g = chain_graph({3, 5, 9});
  const auto s = neighborhood(g, 0, 5.0);
  ASSERT_EQ(s.size(), 1);
  EXPECT_EQ(g.nbr_time()[static_cast<std::size_t>(s.lo)], 3.0);
  EXPECT_TRUE(neighborhood(g, 0, 0.0).empty());
  EXPECT_EQ(neighborhood(g, 0, 100.0).size(), 3);
}

TEST(Neighborhood, MatchesLinearScan) {
  std::mt19937_64 rng(21);
  const auto s = fixtures::random_stream(rng, 60, 2000, 40);
  const auto g = build_tcsr(s);
  for (const auto& q : random_queries(rng, 60, 10000, 40)) {
    const auto slice = neighborhood(g, q.node, q.time);
    EXPECT_EQ(slice.lo, g.begin(q.node));
    EXPECT_EQ(slice.size(), static_cast<std::int64_t>(scan(s.events, q.node, q.time).size()));
  }
}

TEST(MostRecent, NewestFirst) {
  const auto g = chain_graph({1, 2, 3, 4});
  const std::vector<SampleQuery> q = {{0, 10.0}};
  const auto out = sample_most_recent(g, q, 2);
  EXPECT_EQ(out.times(0, 0), 4.0);
  EXPECT_EQ(out.times(0, 1), 3.0);
  EXPECT_EQ(out.valid_count(0), 2);
}

TEST(MostRecent, EmptyNeighborhoodIsPadding) {
  const auto g = chain_graph({1, 2});
  const std::vector<SampleQuery> q = {{0, 1.0}};
  const auto out = sample_most_recent(g, q, 3);
  EXPECT_EQ(out.valid_count(0), 0);
  EXPECT_TRUE((out.nodes.row(0) == kPaddingNode).all());
  EXPECT_TRUE((out.edge_ids.row(0) == kPaddingEdge).all());
}

TEST(MostRecent, TiesResolveToLargerEdgeId) {
  const auto g = chain_graph({2, 2, 2});
  const std::vector<SampleQuery> q = {{0, 3.0}};
  const auto out = sample_most_recent(g, q, 2);
  EXPECT_EQ(out.edge_ids(0, 0), 2);
  EXPECT_EQ(out.edge_ids(0, 1), 1);
}

TEST(MostRecent, MatchesSortTakeK) {
  std::mt19937_64 rng(22);
  const auto s = fixtures::random_stream(rng, 50, 3000, 30);
  const auto g = build_tcsr(s);
  const auto queries = random_queries(rng, 50, 1000, 30);
  const std::int64_t k = 7;
  const auto out = sample_most_recent(g, queries, k);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    auto nbrs = scan(s.events, queries[q].node, queries[q].time);
    std::sort(nbrs.begin(), nbrs.end(),
              [](const Nbr& a, const Nbr& b) { return std::tie(a.t, a.id) > std::tie(b.t, b.id); });
    const auto row = static_cast<Eigen::Index>(q);
    const auto take = std::min<std::size_t>(nbrs.size(), k);
    ASSERT_EQ(out.valid_count(row), static_cast<std::int64_t>(take));
    for (std::size_t j = 0; j < take; ++j) {
      EXPECT_EQ(out.edge_ids(row, j), nbrs[j].id);
      EXPECT_EQ(out.nodes(row, j), nbrs[j].node);
      EXPECT_EQ(out.times(row, j), nbrs[j].t);
    }
  }
}

TEST(Uniform, ExhaustiveWhenBudgetCoversNeighborhood) {
  const auto g = chain_graph({1, 2, 3, 4, 5});
  const std::vector<SampleQuery> q = {{0, 10.0}};
  const auto out = sample_uniform(g, q, 5, 3);
  std::vector<EdgeId> ids(out.edge_ids.row(0).begin(), out.edge_ids.row(0).end());
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, (std::vector<EdgeId>{0, 1, 2, 3, 4}));
}

TEST(Uniform, SingleNeighborPadded) {
  const auto g = chain_graph({1});
  const std::vector<SampleQuery> q = {{0, 10.0}};
  const auto out = sample_uniform(g, q, 5, 3);
  EXPECT_EQ(out.valid_count(0), 1);
  EXPECT_EQ(out.edge_ids(0, 0), 0);
  EXPECT_EQ(out.edge_ids(0, 4), kPaddingEdge);
}

TEST(Uniform, PositionFrequencyAndChiSquare) {
  std::vector<Timestamp> times(20);
  for (int i = 0; i < 20; ++i) times[static_cast<std::size_t>(i)] = i + 1.0;
  const auto g = chain_graph(times);
  const std::int64_t trials = 100000;
  const std::vector<SampleQuery> q(static_cast<std::size_t>(trials), SampleQuery{0, 100.0});
  const auto out = sample_uniform(g, q, 5, 99);
  std::vector<std::int64_t> hits(20, 0);
  for (std::int64_t r = 0; r < trials; ++r) {
    std::vector<EdgeId> row(out.edge_ids.row(r).begin(), out.edge_ids.row(r).end());
    std::sort(row.begin(), row.end());
    ASSERT_EQ(std::adjacent_find(row.begin(), row.end()), row.end()) << "duplicate in trial " << r;
    for (auto id : row) ++hits[static_cast<std::size_t>(id)];
  }
  double chi2 = 0.0;
  const double expected = trials * 0.25;
  for (auto h : hits) {
    EXPECT_NEAR(static_cast<double>(h) / trials, 0.25, 0.01);
    chi2 += (h - expected) * (h - expected) / expected;
  }
  // Each trial draws 5 of 20, so position counts are negatively correlated;
  // the statistic is scaled by 1 / (1 - k/n) before comparing with the
  // chi-square(19) quantile at p = 0.001.
  EXPECT_LT(chi2 / (1.0 - 0.25), 43.82);
}

TEST(Uniform, CausalAndDistinct) {
  std::mt19937_64 rng(23);
  const auto s = fixtures::random_stream(rng, 30, 2000, 25);
  const auto g = build_tcsr(s);
  const auto queries = random_queries(rng, 30, 2000, 25);
  const auto out = sample_uniform(g, queries, 6, 5);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto row = static_cast<Eigen::Index>(q);
    const auto n = static_cast<std::int64_t>(scan(s.events, queries[q].node, queries[q].time).size());
    EXPECT_EQ(out.valid_count(row), std::min<std::int64_t>(n, 6));
    std::vector<EdgeId> ids;
    for (Eigen::Index j = 0; j < 6; ++j) {
      if (!out.valid(row, j)) continue;
      EXPECT_LT(out.times(row, j), queries[q].time);
      ids.push_back(out.edge_ids(row, j));
    }
    std::sort(ids.begin(), ids.end());
    EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
  }
}

TEST(Sampling, DeterministicAndWorkerIndependent) {
  std::mt19937_64 rng(24);
  const auto s = fixtures::random_stream(rng, 80, 5000, 60);
  const auto g = build_tcsr(s);
  const auto queries = random_queries(rng, 80, 3000, 60);
  for (auto strategy : {SamplingStrategy::MostRecent, SamplingStrategy::Uniform}) {
    const auto serial = sample(g, queries, 10, strategy, 42, 1);
    EXPECT_EQ(sample(g, queries, 10, strategy, 42, 1), serial);
    for (unsigned w : {2u, 3u, 8u}) EXPECT_EQ(sample(g, queries, 10, strategy, 42, w), serial);
  }
  EXPECT_FALSE(sample_uniform(g, queries, 3, 1) == sample_uniform(g, queries, 3, 2));
}

TEST(Sampling, RejectsBadArguments) {
  const auto g = chain_graph({1});
  const std::vector<SampleQuery> bad = {{7, 1.0}};
  EXPECT_THROW(sample_most_recent(g, bad, 1), Error);
  const std::vector<SampleQuery> ok = {{0, 1.0}};
  EXPECT_THROW(sample_most_recent(g, ok, 0), Error);
}

TEST(TwoLayer, ChainBoundedByParentTime) {
  // 0-1 at t=1, 1-2 at t=2, 2-3 at t=3.
  EventStream s;
  s.num_nodes = 4;
  s.events = {{0, 1, 1.0, 0}, {1, 2, 2.0, 1}, {2, 3, 3.0, 2}};
  const auto g = build_tcsr(s);
  const std::vector<SampleQuery> q = {{2, 10.0}};
  const auto out = sample_two_layer(g, q, 2, 3, SamplingStrategy::MostRecent, 0);
  // Layer 1 of node 2: node 3 at t=3, node 1 at t=2.
  EXPECT_EQ(out.layer1.nodes(0, 0), 3);
  EXPECT_EQ(out.layer1.nodes(0, 1), 1);
  // Node 3 before t=3 has nothing; node 1 before t=2 has node 0 only.
  EXPECT_EQ(out.layer2.valid_count(0), 0);
  EXPECT_EQ(out.layer2.valid_count(1), 1);
  EXPECT_EQ(out.layer2.nodes(1, 0), 0);
}

TEST(TwoLayer, PaddingParentsGivePaddingRows) {
  const auto g = chain_graph({5});
  const std::vector<SampleQuery> q = {{0, 1.0}, {1, 1.0}};
  for (auto strategy : {SamplingStrategy::MostRecent, SamplingStrategy::Uniform}) {
    const auto out = sample_two_layer(g, q, 2, 2, strategy, 0);
    EXPECT_EQ(out.layer2.num_queries(), 4);
    for (Eigen::Index r = 0; r < 4; ++r) EXPECT_EQ(out.layer2.valid_count(r), 0);
  }
}

TEST(TwoLayer, MatchesRecursiveOracle) {
  std::mt19937_64 rng(25);
  const auto s = fixtures::random_stream(rng, 40, 1500, 30);
  const auto g = build_tcsr(s);
  const auto queries = random_queries(rng, 40, 300, 30);
  const auto out = sample_two_layer(g, queries, 4, 3, SamplingStrategy::MostRecent, 0);
  EXPECT_EQ(out.layer1, sample_most_recent(g, queries, 4));
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      const auto row = static_cast<Eigen::Index>(q) * 4 + j;
      if (!out.layer1.valid(static_cast<Eigen::Index>(q), j)) {
        EXPECT_EQ(out.layer2.valid_count(row), 0);
        continue;
      }
      const std::vector<SampleQuery> hop = {{out.layer1.nodes(static_cast<Eigen::Index>(q), j),
                                             out.layer1.times(static_cast<Eigen::Index>(q), j)}};
      const auto expected = sample_most_recent(g, hop, 3);
      EXPECT_TRUE((out.layer2.edge_ids.row(row) == expected.edge_ids.row(0)).all());
    }
  }
}

TEST(TwoLayer, OneByOneEqualsChainedCalls) {
  std::mt19937_64 rng(26);
  const auto s = fixtures::random_stream(rng, 20, 500, 20);
  const auto g = build_tcsr(s);
  const auto queries = random_queries(rng, 20, 100, 20);
  const auto out = sample_two_layer(g, queries, 1, 1, SamplingStrategy::MostRecent, 0);
  const auto first = sample_most_recent(g, queries, 1);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto r = static_cast<Eigen::Index>(q);
    if (!first.valid(r, 0)) continue;
    const std::vector<SampleQuery> hop = {{first.nodes(r, 0), first.times(r, 0)}};
    EXPECT_EQ(out.layer2.edge_ids(r, 0), sample_most_recent(g, hop, 1).edge_ids(0, 0));
  }
}

TEST(TwoLayer, UniformLayer2IsCausal) {
  std::mt19937_64 rng(27);
  const auto s = fixtures::random_stream(rng, 30, 1500, 30);
  const auto g = build_tcsr(s);
  const auto queries = random_queries(rng, 30, 300, 30);
  const auto out = sample_two_layer(g, queries, 3, 4, SamplingStrategy::Uniform, 9);
  for (Eigen::Index r = 0; r < out.layer2.num_queries(); ++r) {
    const Timestamp parent = out.layer1.times(r / 3, r % 3);
    for (Eigen::Index j = 0; j < 4; ++j) {
      if (out.layer2.valid(r, j)) {
        EXPECT_LT(out.layer2.times(r, j), parent);
      }
    }
  }
}
