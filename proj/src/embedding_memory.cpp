#include "tempograph/embedding_memory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tempograph/rng.hpp"
#include "tempograph/sampling.hpp"

namespace tempograph {

namespace {

constexpr const char* kModule = "baseline_models";

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double pair_loss(double z, double label) { return label * softplus(-z) + (1.0 - label) * softplus(z); }

void check_pair(const EmbeddingMemory& mem, const TrainingPair& p) {
  if (p.src < 0 || p.dst < 0 || p.src >= mem.num_nodes() || p.dst >= mem.num_nodes()) {
    throw Error(ErrorCode::NodeOutOfRange, kModule, "pair endpoint outside the embedding table");
  }
}

std::vector<NodeId> touched_rows(std::span<const TrainingPair> pairs) {
  std::vector<NodeId> rows;
  rows.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    rows.push_back(p.src);
    rows.push_back(p.dst);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

}  // namespace

EmbeddingMemory init_embedding_memory(std::int64_t num_nodes, Eigen::Index d_mem, const TimeEncoder<double>& encoder,
                                      std::uint64_t seed, double init_scale) {
  if (num_nodes < 0 || d_mem < 1) throw Error(ErrorCode::InvalidArgument, kModule, "invalid embedding table shape");
  if (!(init_scale >= 0.0)) throw Error(ErrorCode::InvalidArgument, kModule, "init scale must be non-negative");
  EmbeddingMemory mem;
  mem.encoder = encoder;
  mem.table.resize(num_nodes, d_mem);
  Rng rng(stream_seed(seed, 0xe3b));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index r = 0; r < mem.table.rows(); ++r) {
    for (Eigen::Index c = 0; c < mem.table.cols(); ++c) mem.table(r, c) = init_scale * normal(rng);
  }
  mem.time_weight = Eigen::VectorXd::Zero(encoder.dim());
  return mem;
}

double score(const EmbeddingMemory& mem, NodeId src, NodeId dst, double dt) {
  return link_logit(mem.table.row(src).transpose(), mem.table.row(dst).transpose(), mem.time_weight, mem.encoder(dt));
}

double time_since_last(const TemporalGraph& g, NodeId node, Timestamp t) {
  const auto slice = neighborhood(g, node, t);
  if (slice.empty()) return t;
  return t - g.nbr_time()[static_cast<std::size_t>(slice.hi - 1)];
}

double batch_loss(const EmbeddingMemory& mem, std::span<const TrainingPair> pairs, double weight_decay) {
  double loss = 0.0;
  for (const auto& p : pairs) {
    check_pair(mem, p);
    loss += pair_loss(score(mem, p.src, p.dst, p.dt), p.label);
  }
  double norm = mem.time_weight.squaredNorm();
  for (NodeId r : touched_rows(pairs)) norm += mem.table.row(r).squaredNorm();
  return loss + 0.5 * weight_decay * norm;
}

SparseGradient batch_gradient(const EmbeddingMemory& mem, std::span<const TrainingPair> pairs, double weight_decay) {
  SparseGradient grad;
  grad.rows = touched_rows(pairs);
  grad.row_grad = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grad.rows.size()), mem.dim());
  grad.time_weight_grad = weight_decay * mem.time_weight;
  auto slot = [&](NodeId u) {
    return static_cast<Eigen::Index>(std::lower_bound(grad.rows.begin(), grad.rows.end(), u) - grad.rows.begin());
  };
  for (const auto& p : pairs) {
    check_pair(mem, p);
    const Eigen::VectorXd phi = mem.encoder(p.dt);
    const double z = link_logit(mem.table.row(p.src).transpose(), mem.table.row(p.dst).transpose(), mem.time_weight, phi);
    const double dz = sigmoid(z) - p.label;
    grad.row_grad.row(slot(p.src)) += dz * mem.table.row(p.dst);
    grad.row_grad.row(slot(p.dst)) += dz * mem.table.row(p.src);
    grad.time_weight_grad += dz * phi;
  }
  for (std::size_t i = 0; i < grad.rows.size(); ++i) {
    grad.row_grad.row(static_cast<Eigen::Index>(i)) += weight_decay * mem.table.row(grad.rows[i]);
  }
  return grad;
}

void apply_sgd(EmbeddingMemory& mem, const SparseGradient& grad, double lr, double time_lr) {
  for (std::size_t i = 0; i < grad.rows.size(); ++i) {
    mem.table.row(grad.rows[i]) -= lr * grad.row_grad.row(static_cast<Eigen::Index>(i));
  }
  mem.time_weight -= time_lr * grad.time_weight_grad;
}

TrainResult train_embedding_memory(const TemporalGraph& history, std::span<const Event> train,
                                   const NegativePool& pool, const TimeEncoder<double>& encoder,
                                   const TrainConfig& cfg) {
  if (train.empty()) throw Error(ErrorCode::EmptySplit, kModule, "training split is empty");
  if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.lr >= 0.0) || !(cfg.time_lr >= 0.0) || !(cfg.weight_decay >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, kModule, "invalid training hyperparameters");
  }
  TrainResult result;
  result.memory = init_embedding_memory(history.num_nodes(), cfg.d_mem, encoder, cfg.seed, cfg.init_scale);
  auto& mem = result.memory;

  // Time deltas do not change across epochs.
  std::vector<double> dts(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) dts[i] = time_since_last(history, train[i].src, train[i].t);

  std::vector<std::size_t> order(train.size());
  std::vector<TrainingPair> pairs;
  const BatchPlan plan = plan_batches(static_cast<std::int64_t>(train.size()), cfg.batch_size);
  for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.shuffle) {
      Rng rng = make_stream(cfg.seed, 0x5eed0000ULL + static_cast<std::uint64_t>(epoch));
      std::shuffle(order.begin(), order.end(), rng);
    }
    const std::uint64_t negative_seed = stream_seed(cfg.seed, 0x6e670000ULL + static_cast<std::uint64_t>(epoch));
    double epoch_sum = 0.0;
    std::int64_t epoch_pairs = 0;
    for (std::int64_t b = 0; b < plan.num_batches(); ++b) {
      pairs.clear();
      for (std::int64_t i = plan.begin(b); i < plan.end(b); ++i) {
        const auto idx = order[static_cast<std::size_t>(i)];
        const Event& e = train[idx];
        pairs.push_back({e.src, e.dst, dts[idx], 1.0});
        const NodeId neg = sample_negatives(e, pool, 1, negative_seed).front();
        pairs.push_back({e.src, neg, dts[idx], 0.0});
      }
      const double data_loss = batch_loss(mem, pairs, 0.0);
      if (!std::isfinite(data_loss)) {
        throw Error(ErrorCode::Divergence, kModule,
                    "loss became non-finite in epoch " + std::to_string(epoch) + ", batch " + std::to_string(b));
      }
      result.batch_loss.push_back(data_loss / static_cast<double>(pairs.size()));
      epoch_sum += data_loss;
      epoch_pairs += static_cast<std::int64_t>(pairs.size());
      apply_sgd(mem, batch_gradient(mem, pairs, cfg.weight_decay), cfg.lr, cfg.time_lr);
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(epoch_pairs));
  }
  if (!mem.table.allFinite() || !mem.time_weight.allFinite()) {
    throw Error(ErrorCode::Divergence, kModule, "parameters became non-finite");
  }
  return result;
}

double recency_heuristic_score(const TemporalGraph& g, NodeId src, NodeId dst, Timestamp t, double lambda) {
  const auto slice = neighborhood(g, src, t);
  const auto nbr = g.nbr_dst();
  const auto time = g.nbr_time();
  double total = 0.0;
  for (std::int64_t i = slice.lo; i < slice.hi; ++i) {
    const auto p = static_cast<std::size_t>(i);
    if (nbr[p] == dst) total += std::exp(-lambda * (t - time[p]));
  }
  return total;
}

std::optional<Eigen::VectorXd> init_inductive_memory(const Mailbox& mailbox, NodeId node, std::int64_t mails) {
  if (mails < 1) throw Error(ErrorCode::InvalidArgument, kModule, "mail count must be >= 1");
  if (mailbox.mail_count(node) < mails) return std::nullopt;
  Eigen::VectorXd mean = mailbox.mail(node, 0);
  for (std::int64_t i = 1; i < mails; ++i) mean += mailbox.mail(node, i);
  return mean / static_cast<double>(mails);
}

}  // namespace tempograph
