#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "tempograph/embedding_memory.hpp"
#include "tempograph/evaluation.hpp"

namespace tempograph {

/// Scores candidate links (src, dst) at time t. Scorers see a batch through
/// score() before observe() reveals its events.
class LinkScorer {
 public:
  virtual ~LinkScorer() = default;
  virtual double score(NodeId src, NodeId dst, Timestamp t) const = 0;
  virtual void observe(std::span<const Event> batch) { (void)batch; }
};

class EmbeddingScorer : public LinkScorer {
 public:
  /// `history` supplies time deltas. When `unseen` is non-empty, those nodes
  /// start from the mean of their first three mails once collected: a mail
  /// is the memory of the 1-hop neighbor, or of that neighbor's latest other
  /// neighbor when `two_hop` (bipartite graphs).
  EmbeddingScorer(EmbeddingMemory memory, const TemporalGraph& history, std::vector<NodeId> unseen = {},
                  bool two_hop = false);

  double score(NodeId src, NodeId dst, Timestamp t) const override;
  void observe(std::span<const Event> batch) override;

  const EmbeddingMemory& memory() const { return memory_; }
  /// Unseen nodes whose memory has been initialised from mails.
  std::int64_t initialised_count() const;

 private:
  bool is_pending(NodeId u) const;

  EmbeddingMemory memory_;
  const TemporalGraph* history_;
  std::vector<NodeId> unseen_;
  std::vector<std::uint8_t> initialised_;
  bool two_hop_;
  Mailbox mails_;
};

class RecencyScorer : public LinkScorer {
 public:
  RecencyScorer(const TemporalGraph& history, double lambda) : history_(&history), lambda_(lambda) {}
  double score(NodeId src, NodeId dst, Timestamp t) const override {
    return recency_heuristic_score(*history_, src, dst, t, lambda_);
  }

 private:
  const TemporalGraph* history_;
  double lambda_;
};

/// One row of the scores CSV.
struct ScoreRow {
  EdgeId edge_id = 0;
  bool is_positive = false;
  double score = 0.0;
};

struct LinkPredictionResult {
  std::vector<ScoreRow> rows;
  std::vector<RankingBatch> rankings;
  double mrr = 0.0;
};

/// Streams `events` in chronological batches of `batch_size`: each positive
/// is ranked against `ratio` sampled negatives, then the batch is revealed to
/// the scorer.
LinkPredictionResult evaluate_link_prediction(LinkScorer& scorer, std::span<const Event> events,
                                              const NegativePool& pool, std::int64_t ratio, std::uint64_t seed,
                                              std::int64_t batch_size = kEvalBatchSize);

/// `edge_id,is_positive,score` with a header row.
void write_scores_csv(std::ostream& out, std::span<const ScoreRow> rows);

/// Groups rows by edge id (first-appearance order); each group needs exactly
/// one positive.
std::vector<RankingBatch> read_scores_csv(std::istream& in);

}  // namespace tempograph
