#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tempograph/evaluation.hpp"
#include "tempograph/mailbox.hpp"
#include "tempograph/temporal_graph.hpp"
#include "tempograph/time_encoding.hpp"

namespace tempograph {

inline constexpr Eigen::Index kDefaultMemoryDim = 100;

/// Static node memory: a |V| x D table of learnable rows plus the weight
/// vector of the time term in the link decoder.
struct EmbeddingMemory {
  Eigen::MatrixXd table;
  Eigen::VectorXd time_weight;
  TimeEncoder<double> encoder;

  std::int64_t num_nodes() const { return table.rows(); }
  Eigen::Index dim() const { return table.cols(); }
};

/// Rows ~ Normal(0, init_scale^2), time weights zero.
EmbeddingMemory init_embedding_memory(std::int64_t num_nodes, Eigen::Index d_mem, const TimeEncoder<double>& encoder,
                                      std::uint64_t seed, double init_scale = 0.1);

/// Decoder logit <s_src, s_dst> + <w_t, phi(dt)>.
template <typename DerivedS, typename DerivedD, typename DerivedW, typename DerivedP>
typename DerivedS::Scalar link_logit(const Eigen::MatrixBase<DerivedS>& s_src, const Eigen::MatrixBase<DerivedD>& s_dst,
                                     const Eigen::MatrixBase<DerivedW>& w_t, const Eigen::MatrixBase<DerivedP>& phi) {
  return s_src.dot(s_dst) + w_t.dot(phi);
}

double score(const EmbeddingMemory& mem, NodeId src, NodeId dst, double dt);

/// t minus the time of `node`'s latest interaction strictly before t, or t
/// itself when there is none.
double time_since_last(const TemporalGraph& g, NodeId node, Timestamp t);

/// One labelled decoder input.
struct TrainingPair {
  NodeId src = 0;
  NodeId dst = 0;
  double dt = 0.0;
  double label = 1.0;
};

/// Gradient restricted to the touched table rows.
struct SparseGradient {
  std::vector<NodeId> rows;
  Eigen::MatrixXd row_grad;
  Eigen::VectorXd time_weight_grad;
};

/// Sum over pairs of the logistic loss -y log s(z) - (1-y) log(1 - s(z)),
/// plus weight_decay / 2 times the squared norm of the touched rows and w_t.
double batch_loss(const EmbeddingMemory& mem, std::span<const TrainingPair> pairs, double weight_decay);

/// Closed-form gradient of batch_loss.
SparseGradient batch_gradient(const EmbeddingMemory& mem, std::span<const TrainingPair> pairs, double weight_decay);

/// Plain SGD step. The time weights are shared by every pair of the batch and
/// take their own step size.
void apply_sgd(EmbeddingMemory& mem, const SparseGradient& grad, double lr, double time_lr);

struct TrainConfig {
  double lr = 0.05;
  double time_lr = 1e-4;
  std::int64_t epochs = 5;
  double weight_decay = 1e-4;
  std::int64_t batch_size = kTrainBatchSize;
  std::uint64_t seed = 0;
  bool shuffle = true;
  Eigen::Index d_mem = kDefaultMemoryDim;
  double init_scale = 0.1;
};

struct TrainResult {
  EmbeddingMemory memory;
  /// Mean per-pair loss of every batch, in order.
  std::vector<double> batch_loss;
  /// Mean per-pair loss of every epoch.
  std::vector<double> epoch_loss;
};

/// Trains the table on the given edges with 1:1 negatives per batch. Time
/// deltas come from `history` (strictly earlier interactions only). Throws
/// Divergence if the loss becomes non-finite.
TrainResult train_embedding_memory(const TemporalGraph& history, std::span<const Event> train,
                                   const NegativePool& pool, const TimeEncoder<double>& encoder,
                                   const TrainConfig& cfg);

/// Sum of exp(-lambda (t - t_e)) over interactions between src and dst
/// strictly before t. In a symmetric graph both directions count.
double recency_heuristic_score(const TemporalGraph& g, NodeId src, NodeId dst, Timestamp t, double lambda);

inline constexpr std::int64_t kInitMails = 3;

/// Element-wise mean of the first `mails` queued mails of `node`, or nullopt
/// if fewer are queued.
std::optional<Eigen::VectorXd> init_inductive_memory(const Mailbox& mailbox, NodeId node,
                                                     std::int64_t mails = kInitMails);

}  // namespace tempograph
