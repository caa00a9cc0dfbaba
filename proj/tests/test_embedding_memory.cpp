#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "support.hpp"
#include "tempograph/link_prediction.hpp"
#include "tempograph/synthetic.hpp"

using namespace tempograph;

TEST(TimeEncoding, ZeroDeltaIsOnes) {
  const TimeEncoder<double> enc(100);
  EXPECT_TRUE(time_encode(0.0, enc).isOnes(0.0));
  EXPECT_DOUBLE_EQ(enc.alpha(), 10.0);
  EXPECT_DOUBLE_EQ(enc.beta(), 10.0);
  EXPECT_DOUBLE_EQ(enc.frequencies()[0], 1.0);
  EXPECT_NEAR(enc.frequencies()[10], 0.1, 1e-15);
}

TEST(TimeEncoding, SingleFrequency) {
  Eigen::VectorXd omega(1);
  omega << std::numbers::pi;
  const auto enc = TimeEncoder<double>::from_frequencies(omega);
  EXPECT_NEAR(enc(1.0)[0], -1.0, 1e-15);
}

TEST(TimeEncoding, MatchesScalarLoop) {
  const TimeEncoder<double> enc(100, 3.0, 7.0);
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> dt(0.0, 1e5);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = dt(rng);
    const Eigen::VectorXd v = enc(x);
    for (int i = 0; i < 100; ++i) {
      EXPECT_NEAR(v[i], std::cos(x * std::pow(3.0, -static_cast<double>(i) / 7.0)), 1e-12);
    }
  }
}

TEST(TimeEncoding, FloatInstantiation) {
  const TimeEncoder<float> enc(8);
  Eigen::VectorXf out(8);
  enc.encode_into(2.5f, out);
  EXPECT_NEAR(out[0], std::cos(2.5f), 1e-6f);
}

TEST(TimeEncoding, LipschitzPerCoordinate) {
  const TimeEncoder<double> enc(50);
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> dt(0.0, 1000.0);
  const double h = 1e-4;
  for (int trial = 0; trial < 200; ++trial) {
    const double x = dt(rng);
    const Eigen::VectorXd slope = ((enc(x + h) - enc(x)) / h).cwiseAbs();
    EXPECT_TRUE((slope.array() <= enc.frequencies().array() * (1.0 + 1e-6) + 1e-9).all());
  }
}

TEST(TimeEncoding, RejectsBadConstants) {
  EXPECT_THROW(TimeEncoder<double>(4, 0.0, 1.0), Error);
  EXPECT_THROW(TimeEncoder<double>(4, 2.0, -1.0), Error);
}

TEST(Score, ZeroTableLeavesTimeTerm) {
  auto mem = init_embedding_memory(3, 4, TimeEncoder<double>(5), 0, 0.0);
  mem.time_weight = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
  EXPECT_NEAR(score(mem, 0, 1, 3.0), mem.time_weight.dot(mem.encoder(3.0)), 1e-15);
}

TEST(Score, SelfPairIsSquaredNorm) {
  const auto mem = init_embedding_memory(3, 4, TimeEncoder<double>(5), 1);
  EXPECT_NEAR(score(mem, 2, 2, 1.0), mem.table.row(2).squaredNorm(), 1e-15);
}

TEST(Score, MatchesDirectFormula) {
  auto mem = init_embedding_memory(10, 6, TimeEncoder<double>(4, 2.0, 2.0), 2, 1.0);
  mem.time_weight = Eigen::VectorXd::Random(4);
  for (NodeId u = 0; u < 10; ++u) {
    double expected = 0.0;
    for (int i = 0; i < 6; ++i) expected += mem.table(u, i) * mem.table(9 - u, i);
    for (int i = 0; i < 4; ++i) expected += mem.time_weight[i] * std::cos(7.5 * std::pow(2.0, -i / 2.0));
    EXPECT_NEAR(score(mem, u, 9 - u, 7.5), expected, 1e-12);
  }
}

TEST(Init, NormalScaleAndSeed) {
  const auto a = init_embedding_memory(200, 100, TimeEncoder<double>(10), 5);
  EXPECT_NEAR(std::sqrt(a.table.squaredNorm() / a.table.size()), 0.1, 0.005);
  EXPECT_EQ(a.table, init_embedding_memory(200, 100, TimeEncoder<double>(10), 5).table);
  EXPECT_TRUE(a.time_weight.isZero(0.0));
}

TEST(Gradient, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (const auto& p : fixtures::gradient_probes(seed, 20)) {
      EXPECT_LT(p.relative_error(), 1e-4) << "analytic " << p.analytic << " numeric " << p.numeric;
    }
  }
}

TEST(Gradient, LossTermsByHand) {
  auto mem = init_embedding_memory(2, 1, TimeEncoder<double>(1), 0, 0.0);
  mem.table << 1.0, 2.0;
  const std::vector<TrainingPair> pos = {{0, 1, 0.0, 1.0}};
  // z = 2 + 0 (w_t is zero): loss = log(1 + e^-2).
  EXPECT_NEAR(batch_loss(mem, pos, 0.0), std::log1p(std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(batch_loss(mem, pos, 0.5), std::log1p(std::exp(-2.0)) + 0.25 * 5.0, 1e-15);
}

namespace {

struct Toy {
  TemporalGraph g;
  std::vector<Event> train;
};

Toy toy_data(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.num_nodes = 50;
  cfg.num_edges = 2000;
  cfg.timesteps = 100;
  cfg.alpha = 0.9;
  cfg.beta = 0.6;
  cfg.seed = seed;
  auto s = generate(cfg);
  Toy t;
  t.g = build_tcsr(s);
  t.train = s.events;
  return t;
}

}  // namespace

TEST(Train, ZeroLearningRateKeepsTable) {
  const auto toy = toy_data(1);
  const NegativePool pool(50, {}, false);
  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.time_lr = 0.0;
  cfg.epochs = 2;
  cfg.d_mem = 8;
  cfg.seed = 3;
  const auto r = train_embedding_memory(toy.g, toy.train, pool, TimeEncoder<double>(4), cfg);
  const auto init = init_embedding_memory(50, 8, TimeEncoder<double>(4), 3);
  EXPECT_EQ(r.memory.table, init.table);
  EXPECT_EQ(r.epoch_loss.size(), 2u);
  EXPECT_EQ(r.batch_loss.size(), 8u);
}

TEST(Train, LossTrendsDownAndIsReproducible) {
  const auto toy = toy_data(2);
  const NegativePool pool(50, {}, false);
  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.d_mem = 16;
  cfg.seed = 4;
  const auto a = train_embedding_memory(toy.g, toy.train, pool, TimeEncoder<double>(8), cfg);
  EXPECT_LT(a.epoch_loss.back(), a.epoch_loss.front());
  const auto b = train_embedding_memory(toy.g, toy.train, pool, TimeEncoder<double>(8), cfg);
  EXPECT_EQ(a.memory.table, b.memory.table);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
}

TEST(Train, OverfitSinglePair) {
  auto mem = init_embedding_memory(10, 8, TimeEncoder<double>(4), 9);
  const std::vector<TrainingPair> pair = {{1, 2, 3.0, 1.0}};
  const double fixed = score(mem, 5, 7, 3.0);
  for (int step = 0; step < 200; ++step) apply_sgd(mem, batch_gradient(mem, pair, 0.0), 0.1, 0.0);
  EXPECT_GT(score(mem, 1, 2, 3.0), fixed);
  EXPECT_GT(score(mem, 1, 2, 3.0), 2.0);
}

TEST(Train, DivergenceSignalled) {
  const auto toy = toy_data(3);
  const NegativePool pool(50, {}, false);
  TrainConfig cfg;
  cfg.lr = 1e6;
  cfg.epochs = 20;
  cfg.d_mem = 8;
  cfg.init_scale = 10.0;
  try {
    train_embedding_memory(toy.g, toy.train, pool, TimeEncoder<double>(4), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Divergence);
  }
}

TEST(Train, Errors) {
  const auto toy = toy_data(4);
  const NegativePool pool(50, {}, false);
  EXPECT_THROW(train_embedding_memory(toy.g, {}, pool, TimeEncoder<double>(4), {}), Error);
  TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(train_embedding_memory(toy.g, toy.train, pool, TimeEncoder<double>(4), cfg), Error);
}

TEST(TimeSinceLast, StrictHistory) {
  EventStream s;
  s.num_nodes = 3;
  s.events = {{0, 1, 2.0, 0}, {0, 2, 5.0, 1}};
  const auto g = build_tcsr(s);
  EXPECT_EQ(time_since_last(g, 0, 5.0), 3.0);
  EXPECT_EQ(time_since_last(g, 0, 6.0), 1.0);
  EXPECT_EQ(time_since_last(g, 2, 4.0), 4.0);
}

TEST(Recency, Examples) {
  EventStream s;
  s.num_nodes = 3;
  s.events = {{0, 1, 4.0, 0}};
  const auto g = build_tcsr(s);
  EXPECT_EQ(recency_heuristic_score(g, 0, 2, 10.0, 0.1), 0.0);
  EXPECT_EQ(recency_heuristic_score(g, 0, 1, 5.0, 0.0), 1.0);
  EXPECT_EQ(recency_heuristic_score(g, 0, 1, 4.0, 0.0), 0.0);
}

TEST(Recency, MatchesDirectSum) {
  std::mt19937_64 rng(73);
  const auto s = fixtures::random_stream(rng, 8, 400, 100);
  const auto g = build_tcsr(s);
  for (NodeId u = 0; u < 8; ++u) {
    for (NodeId v = 0; v < 8; ++v) {
      double expected = 0.0;
      for (const auto& e : s.events) {
        const bool pair = (e.src == u && e.dst == v) || (e.src == v && e.dst == u);
        if (pair && e.t < 60.0) expected += std::exp(-0.05 * (60.0 - e.t));
      }
      EXPECT_NEAR(recency_heuristic_score(g, u, v, 60.0, 0.05), expected, 1e-12);
    }
  }
}

TEST(Recency, ExploitsRepetition) {
  auto run = [](double beta) {
    SynthConfig cfg;
    cfg.num_nodes = 200;
    cfg.num_edges = 20000;
    cfg.timesteps = 200;
    cfg.beta = beta;
    cfg.seed = 5;
    const auto s = generate(cfg);
    const auto parts = split(s.events, {});
    const auto history = build_tcsr(s);
    RecencyScorer scorer(history, 0.01);
    const NegativePool pool(cfg.num_nodes, {}, false);
    return evaluate_link_prediction(scorer, parts.test, pool, 49, 1).mrr;
  };
  EXPECT_GT(run(0.8), run(0.001));
}

TEST(InductiveInit, MeanOfFirstThreeMails) {
  Mailbox box(2, 0);
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(4, 1.0, 4.0);
  for (int i = 0; i < 3; ++i) box.push_mail(0, v);
  EXPECT_EQ(*init_inductive_memory(box, 0), v);

  for (int i = 0; i < 4; ++i) box.push_mail(1, Eigen::VectorXd::Unit(5, std::min(i, 2)) * (i < 3 ? 1.0 : 100.0));
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(5);
  expected.head(3).setConstant(1.0 / 3.0);
  EXPECT_TRUE(init_inductive_memory(box, 1)->isApprox(expected, 1e-15));
}

TEST(InductiveInit, RandomMailsAndShortQueue) {
  Mailbox box(1, 0);
  std::mt19937_64 rng(74);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Eigen::VectorXd> mails;
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd m(6);
    for (auto& x : m) x = n(rng);
    mails.push_back(m);
    box.push_mail(0, m);
  }
  EXPECT_FALSE(init_inductive_memory(box, 0).has_value());
  Eigen::VectorXd m(6);
  for (auto& x : m) x = n(rng);
  mails.push_back(m);
  box.push_mail(0, m);
  Eigen::VectorXd mean = (mails[0] + mails[1] + mails[2]) / 3.0;
  EXPECT_TRUE(init_inductive_memory(box, 0)->isApprox(mean, 1e-15));
}

TEST(InductiveInit, ScorerInstallsNeighborMean) {
  EventStream s;
  s.num_nodes = 5;
  s.events = {{1, 0, 1.0, 0}, {2, 0, 2.0, 1}, {0, 3, 3.0, 2}, {0, 4, 4.0, 3}};
  const auto g = build_tcsr(s);
  auto mem = init_embedding_memory(5, 3, TimeEncoder<double>(2), 1);
  const Eigen::MatrixXd before = mem.table;
  EmbeddingScorer scorer(mem, g, {0});
  scorer.observe(std::span<const Event>(s.events.data(), 2));
  EXPECT_EQ(scorer.initialised_count(), 0);
  EXPECT_EQ(scorer.memory().table.row(0), before.row(0));
  scorer.observe(std::span<const Event>(s.events.data() + 2, 2));
  EXPECT_EQ(scorer.initialised_count(), 1);
  const Eigen::RowVectorXd mean = (before.row(1) + before.row(2) + before.row(3)) / 3.0;
  EXPECT_TRUE(scorer.memory().table.row(0).isApprox(mean, 1e-15));
  EXPECT_EQ(scorer.memory().table.row(4), before.row(4));
}

TEST(InductiveInit, TwoHopUsesNeighborsNeighbor) {
  // Bipartite: users 0..1, items 2..4. Unseen user 0 takes the memory of
  // the latest other user of each item it touches.
  EventStream s;
  s.num_nodes = 5;
  s.events = {{1, 2, 1.0, 0}, {1, 3, 1.0, 1}, {1, 4, 1.0, 2}, {0, 2, 2.0, 3}, {0, 3, 3.0, 4}, {0, 4, 4.0, 5}};
  const auto g = build_tcsr(s);
  const auto mem = init_embedding_memory(5, 3, TimeEncoder<double>(2), 1);
  EmbeddingScorer scorer(mem, g, {0}, true);
  scorer.observe(std::span<const Event>(s.events.data() + 3, 3));
  EXPECT_EQ(scorer.initialised_count(), 1);
  EXPECT_TRUE(scorer.memory().table.row(0).isApprox(mem.table.row(1), 1e-15));
}
