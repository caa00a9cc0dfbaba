#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tempograph/temporal_graph.hpp"

namespace tempograph {

enum class SplitMode { Transductive, Inductive };

struct SplitSpec {
  double train_frac = 0.70;
  double valid_frac = 0.15;
  double test_frac = 0.15;
  SplitMode mode = SplitMode::Transductive;
  double inductive_mask_frac = 0.10;
  std::uint64_t seed = 0;
};

struct SplitResult {
  std::vector<Event> train;
  std::vector<Event> valid;
  std::vector<Event> test;
  /// Parallel to `test`; 1 when the edge touches an unseen node.
  std::vector<std::uint8_t> test_inductive;
  /// Sorted ascending. Empty in transductive mode.
  std::vector<NodeId> unseen_nodes;
  /// Boundaries before masking: [0, train_end) [train_end, valid_end) [valid_end, |E|).
  std::int64_t train_end = 0;
  std::int64_t valid_end = 0;
};

/// Chronological split at round(|E| * cumulative fraction). In inductive mode
/// a seeded draw of round(mask_frac * |test nodes|) (at least one) nodes from
/// the test set becomes unseen: their training edges are removed and their
/// test edges flagged. Throws EmptySplit when a part ends up empty.
SplitResult split(std::span<const Event> events, const SplitSpec& spec);

enum class SplitPart { Train, Valid, Test };

struct NegativeSpec {
  std::int64_t train_ratio = 1;
  std::int64_t valid_ratio = 9;
  std::int64_t test_ratio = 49;
  bool bipartite_aware = true;
  std::uint64_t seed = 0;

  std::int64_t ratio(SplitPart part) const;
};

/// Eligible destinations per source class. Built once per graph.
class NegativePool {
 public:
  /// `classes` may be empty (all nodes eligible for every source).
  NegativePool(std::int64_t num_nodes, std::span<const std::int8_t> classes, bool bipartite_aware);

  std::int64_t num_nodes() const { return num_nodes_; }
  bool bipartite() const { return bipartite_; }
  /// Candidates for a source node, sorted ascending.
  std::span<const NodeId> eligible(NodeId src) const;

 private:
  std::int64_t num_nodes_ = 0;
  bool bipartite_ = false;
  std::vector<std::int8_t> classes_;
  std::vector<NodeId> all_;
  std::vector<NodeId> by_class_[2];
};

/// `ratio` distinct destinations drawn uniformly from the source's eligible
/// pool minus the true destination. Depends only on (seed, edge id). Throws
/// PoolTooSmall when fewer than `ratio` candidates exist.
std::vector<NodeId> sample_negatives(const Event& positive, const NegativePool& pool, std::int64_t ratio,
                                     std::uint64_t seed);

/// One positive score and the scores of its negatives.
struct RankingBatch {
  double positive = 0.0;
  std::vector<double> negatives;
};

/// 1 / (1 + #negatives scoring >= the positive). Ties rank the positive lower.
double reciprocal_rank(double positive, std::span<const double> negatives);

/// Mean reciprocal rank. Throws InvalidArgument for an empty list.
double mrr(std::span<const RankingBatch> batches);

/// Expected MRR of i.i.d. continuous scores with n negatives: H_{n+1} / (n+1).
double random_mrr(std::int64_t num_negatives);

}  // namespace tempograph
