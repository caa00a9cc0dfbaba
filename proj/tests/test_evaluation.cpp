#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"
#include "tempograph/link_prediction.hpp"

using namespace tempograph;

namespace {

std::vector<Event> chronological(std::int64_t n, std::int64_t num_nodes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return fixtures::random_stream(rng, num_nodes, n, 1000).events;
}

// Rank of the positive after sorting all scores descending, with the
// positive placed after every tied negative.
double sort_rank(double pos, const std::vector<double>& neg) {
  std::vector<std::pair<double, int>> all;
  all.emplace_back(pos, 1);
  for (double s : neg) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].second == 1) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

}  // namespace

TEST(Split, Sizes) {
  const auto ev = chronological(100, 10, 1);
  const auto r = split(ev, {});
  EXPECT_EQ(r.train.size(), 70u);
  EXPECT_EQ(r.valid.size(), 15u);
  EXPECT_EQ(r.test.size(), 15u);
  EXPECT_EQ(r.train_end, 70);
  EXPECT_EQ(r.valid_end, 85);
  EXPECT_TRUE(r.unseen_nodes.empty());
  EXPECT_EQ(r.train.back(), ev[69]);
  EXPECT_EQ(r.test.front(), ev[85]);
}

TEST(Split, RoundedBoundaries) {
  for (std::int64_t n : {7, 33, 1001, 157474}) {
    const auto ev = chronological(n, 50, 2);
    const auto r = split(ev, {});
    EXPECT_EQ(r.train_end, std::llround(n * 0.70));
    EXPECT_EQ(r.valid_end, std::llround(n * 0.85));
    EXPECT_EQ(static_cast<std::int64_t>(r.train.size() + r.valid.size() + r.test.size()), n);
  }
}

TEST(Split, InductiveMaskingMatchesSetOracle) {
  const auto ev = chronological(5000, 300, 3);
  SplitSpec spec;
  spec.mode = SplitMode::Inductive;
  spec.seed = 17;
  const auto r = split(ev, spec);
  ASSERT_FALSE(r.unseen_nodes.empty());
  const std::set<NodeId> unseen(r.unseen_nodes.begin(), r.unseen_nodes.end());
  std::set<NodeId> test_nodes;
  for (const auto& e : r.test) test_nodes.insert({e.src, e.dst});
  EXPECT_EQ(static_cast<std::int64_t>(unseen.size()),
            std::max<std::int64_t>(1, std::llround(0.1 * static_cast<double>(test_nodes.size()))));
  for (NodeId u : unseen) EXPECT_TRUE(test_nodes.count(u));

  auto hits = [&](const Event& e) { return unseen.count(e.src) || unseen.count(e.dst); };
  std::vector<Event> expected_train;
  for (std::int64_t i = 0; i < r.train_end; ++i) {
    if (!hits(ev[static_cast<std::size_t>(i)])) expected_train.push_back(ev[static_cast<std::size_t>(i)]);
  }
  EXPECT_EQ(r.train, expected_train);
  for (std::size_t i = 0; i < r.test.size(); ++i) EXPECT_EQ(r.test_inductive[i] != 0, hits(r.test[i]));

  const auto again = split(ev, spec);
  EXPECT_EQ(again.unseen_nodes, r.unseen_nodes);
  spec.seed = 18;
  EXPECT_NE(split(ev, spec).unseen_nodes, r.unseen_nodes);
}

TEST(Split, Errors) {
  const auto ev = chronological(100, 10, 4);
  SplitSpec bad;
  bad.train_frac = 0.8;
  EXPECT_THROW(split(ev, bad), Error);
  auto shuffled = ev;
  std::swap(shuffled[0], shuffled[99]);
  EXPECT_THROW(split(shuffled, {}), Error);
  const auto tiny = chronological(3, 5, 5);
  try {
    split(tiny, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySplit);
  }
}

TEST(Negatives, RatiosPerPart) {
  NegativeSpec spec;
  EXPECT_EQ(spec.ratio(SplitPart::Train), 1);
  EXPECT_EQ(spec.ratio(SplitPart::Valid), 9);
  EXPECT_EQ(spec.ratio(SplitPart::Test), 49);
  const NegativePool pool(100, {}, false);
  const auto neg = sample_negatives({3, 4, 1.0, 0}, pool, spec.ratio(SplitPart::Test), 0);
  EXPECT_EQ(neg.size(), 49u);
  std::set<NodeId> distinct(neg.begin(), neg.end());
  EXPECT_EQ(distinct.size(), 49u);
  EXPECT_FALSE(distinct.count(4));
}

TEST(Negatives, BipartiteNeverSameClass) {
  std::vector<std::int8_t> classes(60);
  for (std::size_t i = 0; i < classes.size(); ++i) classes[i] = i < 20 ? 0 : 1;
  const NegativePool pool(60, classes, true);
  for (NodeId src = 0; src < 60; ++src) {
    const NodeId dst = src < 20 ? 20 + src : src - 20;
    for (EdgeId id = 0; id < 20; ++id) {
      for (NodeId v : sample_negatives({src, dst, 1.0, id}, pool, 9, 5)) {
        EXPECT_NE(classes[static_cast<std::size_t>(v)], classes[static_cast<std::size_t>(src)]);
        EXPECT_NE(v, dst);
      }
    }
  }
  const NegativePool flat(60, classes, false);
  EXPECT_EQ(flat.eligible(0).size(), 60u);
}

TEST(Negatives, UniformOverEligible) {
  const NegativePool pool(11, {}, false);
  std::vector<std::int64_t> hits(11, 0);
  const std::int64_t draws = 100000;
  for (EdgeId id = 0; id < draws; ++id) ++hits[static_cast<std::size_t>(sample_negatives({0, 10, 1.0, id}, pool, 1, 3)[0])];
  EXPECT_EQ(hits[10], 0);
  for (int v = 0; v < 10; ++v) EXPECT_NEAR(static_cast<double>(hits[static_cast<std::size_t>(v)]) / draws, 0.1, 0.005);
}

TEST(Negatives, DeterministicPerEdge) {
  const NegativePool pool(500, {}, false);
  const Event e{1, 2, 3.0, 77};
  EXPECT_EQ(sample_negatives(e, pool, 49, 9), sample_negatives(e, pool, 49, 9));
  EXPECT_NE(sample_negatives(e, pool, 49, 9), sample_negatives(e, pool, 49, 10));
}

TEST(Negatives, PoolTooSmall) {
  const NegativePool pool(10, {}, false);
  try {
    sample_negatives({0, 1, 1.0, 0}, pool, 10, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PoolTooSmall);
  }
  EXPECT_EQ(sample_negatives({0, 1, 1.0, 0}, pool, 9, 0).size(), 9u);
}

TEST(Mrr, Extremes) {
  const std::vector<double> neg(49, 0.5);
  EXPECT_DOUBLE_EQ(reciprocal_rank(1.0, neg), 1.0);
  EXPECT_DOUBLE_EQ(reciprocal_rank(0.0, neg), 1.0 / 50.0);
  EXPECT_DOUBLE_EQ(reciprocal_rank(0.5, neg), 1.0 / 50.0);
  EXPECT_THROW(mrr({}), Error);
}

TEST(Mrr, MatchesSortOracle) {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<int> coarse(0, 5);
  std::vector<RankingBatch> batches(1000);
  double expected = 0.0;
  for (auto& b : batches) {
    b.positive = coarse(rng);
    for (int j = 0; j < 9; ++j) b.negatives.push_back(coarse(rng));
    expected += sort_rank(b.positive, b.negatives);
  }
  expected /= 1000.0;
  EXPECT_NEAR(mrr(batches), expected, 1e-12);
}

TEST(Mrr, InvariantUnderIncreasingTransform) {
  std::mt19937_64 rng(62);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<RankingBatch> a(500), b(500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i].positive = n(rng);
    b[i].positive = std::exp(3.0 * a[i].positive) + 1.0;
    for (int j = 0; j < 9; ++j) {
      a[i].negatives.push_back(n(rng));
      b[i].negatives.push_back(std::exp(3.0 * a[i].negatives.back()) + 1.0);
    }
  }
  EXPECT_EQ(mrr(a), mrr(b));
  const double v = mrr(a);
  EXPECT_GT(v, 0.0);
  EXPECT_LE(v, 1.0);
}

TEST(Mrr, RandomScoresMatchClosedForm) {
  EXPECT_NEAR(random_mrr(9), 0.2928968253968254, 1e-15);
  EXPECT_DOUBLE_EQ(random_mrr(0), 1.0);
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RankingBatch> batches(100000);
  for (auto& b : batches) {
    b.positive = u(rng);
    for (int j = 0; j < 9; ++j) b.negatives.push_back(u(rng));
  }
  EXPECT_NEAR(mrr(batches) / random_mrr(9), 1.0, 0.02);
}

namespace {

// Scores every candidate by a fixed node table; records what it has seen.
class TableScorer : public LinkScorer {
 public:
  explicit TableScorer(std::vector<double> v) : v_(std::move(v)) {}
  double score(NodeId, NodeId dst, Timestamp) const override { return v_[static_cast<std::size_t>(dst)]; }
  void observe(std::span<const Event> batch) override { batches.push_back(static_cast<std::int64_t>(batch.size())); }
  std::vector<std::int64_t> batches;

 private:
  std::vector<double> v_;
};

}  // namespace

TEST(LinkPrediction, StreamsBatchesAndRanks) {
  const auto ev = chronological(250, 30, 7);
  std::vector<double> table(30);
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = static_cast<double>(i);
  TableScorer scorer(table);
  const NegativePool pool(30, {}, false);
  const auto r = evaluate_link_prediction(scorer, ev, pool, 9, 4);
  EXPECT_EQ(scorer.batches, (std::vector<std::int64_t>{100, 100, 50}));
  ASSERT_EQ(r.rankings.size(), 250u);
  EXPECT_EQ(r.rows.size(), 2500u);
  double expected = 0.0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    std::vector<double> neg;
    for (NodeId v : sample_negatives(ev[i], pool, 9, 4)) neg.push_back(table[static_cast<std::size_t>(v)]);
    expected += sort_rank(table[static_cast<std::size_t>(ev[i].dst)], neg);
  }
  EXPECT_NEAR(r.mrr, expected / 250.0, 1e-12);
}

TEST(ScoresCsv, RoundTrip) {
  const std::vector<ScoreRow> rows = {{5, true, 0.5}, {5, false, 0.25}, {5, false, 0.75}, {2, false, 1.0}, {2, true, 2.0}};
  std::ostringstream out;
  write_scores_csv(out, rows);
  std::istringstream in(out.str());
  const auto batches = read_scores_csv(in);
  ASSERT_EQ(batches.size(), 2u);
  EXPECT_EQ(batches[0].positive, 0.5);
  EXPECT_EQ(batches[0].negatives, (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(batches[1].positive, 2.0);
  EXPECT_DOUBLE_EQ(mrr(batches), (0.5 + 1.0) / 2.0);
}

TEST(ScoresCsv, Malformed) {
  std::istringstream two_pos("edge_id,is_positive,score\n1,1,0.5\n1,1,0.7\n");
  EXPECT_THROW(read_scores_csv(two_pos), Error);
  std::istringstream no_pos("edge_id,is_positive,score\n1,0,0.5\n");
  EXPECT_THROW(read_scores_csv(no_pos), Error);
  std::istringstream bad("edge_id,is_positive,score\n1,2,0.5\n");
  EXPECT_THROW(read_scores_csv(bad), Error);
  std::istringstream junk("edge_id,is_positive,score\n1,1,high\n");
  EXPECT_THROW(read_scores_csv(junk), Error);
}
