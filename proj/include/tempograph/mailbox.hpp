#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tempograph/temporal_graph.hpp"
#include "tempograph/time_encoding.hpp"

namespace tempograph {

inline constexpr std::int64_t kTrainBatchSize = 600;
inline constexpr std::int64_t kEvalBatchSize = 100;

/// Contiguous batch boundaries over a chronologically ordered event range.
struct BatchPlan {
  /// boundaries.front() == 0, boundaries.back() == num_events.
  std::vector<std::int64_t> boundaries;

  std::int64_t num_batches() const { return static_cast<std::int64_t>(boundaries.size()) - 1; }
  std::int64_t begin(std::int64_t b) const { return boundaries[static_cast<std::size_t>(b)]; }
  std::int64_t end(std::int64_t b) const { return boundaries[static_cast<std::size_t>(b) + 1]; }
  std::int64_t size(std::int64_t b) const { return end(b) - begin(b); }
};

/// ceil(num_events / bs) batches; only the last may be short.
BatchPlan plan_batches(std::int64_t num_events, std::int64_t bs);

/// Two messages per event, rows 2i (to src) and 2i+1 (to dst):
///   [s_self | s_other | phi(t - t_last_self) | e_feat]
struct MessageBatch {
  std::vector<NodeId> recipient;
  std::vector<Timestamp> time;
  Eigen::MatrixXd payload;

  std::int64_t size() const { return static_cast<std::int64_t>(recipient.size()); }
};

/// Builds messages for a batch. `memory` holds one row per node, `last_update`
/// the time of each node's last memory update (0 for never-updated nodes).
/// `edge_feat` is indexed by edge id and may be empty when d_e == 0.
MessageBatch build_messages(std::span<const Event> batch, const Eigen::Ref<const Eigen::MatrixXd>& memory,
                            std::span<const Timestamp> last_update, const TimeEncoder<double>& encoder,
                            const Eigen::Ref<const Eigen::MatrixXd>& edge_feat, std::int64_t d_e,
                            unsigned workers = 1);

/// Latest message per recipient. `nodes` is sorted ascending; `message[i]` is
/// the index of the winning message for nodes[i].
struct LastMessages {
  std::vector<NodeId> nodes;
  std::vector<std::int64_t> message;

  friend bool operator==(const LastMessages&, const LastMessages&) = default;
};

/// Segmented reduction: keeps, per recipient, the message with the greatest
/// (t, message index). Work is split into sorted chunks that are reduced
/// independently and merged.
LastMessages reduce_last_per_node(std::span<const NodeId> recipient, std::span<const Timestamp> time,
                                  unsigned workers = 1);

/// Reference implementation that scans the whole batch once per distinct
/// recipient. Kept for timing comparisons only.
LastMessages reduce_last_linear_probe(std::span<const NodeId> recipient,
                                      std::span<const Timestamp> time);

/// Read-only view of mailbox state for a set of nodes.
struct MailboxSnapshot {
  std::vector<NodeId> nodes;
  Eigen::MatrixXd message;
  std::vector<Timestamp> message_time;
  std::vector<std::uint8_t> has_message;
  std::vector<Timestamp> last_update;
};

/// Per-node cached latest message and last-update time, plus a small FIFO of
/// raw mails used to initialise memory of unseen nodes.
class Mailbox {
 public:
  static constexpr std::int64_t kQueueCapacity = 8;

  Mailbox(std::int64_t num_nodes, Eigen::Index message_dim);

  std::int64_t num_nodes() const { return static_cast<std::int64_t>(last_update_.size()); }
  Eigen::Index message_dim() const { return message_.cols(); }

  bool has_message(NodeId u) const { return has_message_[static_cast<std::size_t>(u)] != 0; }
  auto message(NodeId u) const { return message_.row(u); }
  Timestamp message_time(NodeId u) const { return message_time_[static_cast<std::size_t>(u)]; }
  Timestamp last_update(NodeId u) const { return last_update_[static_cast<std::size_t>(u)]; }
  std::span<const Timestamp> last_update() const { return last_update_; }
  /// Largest message timestamp committed so far.
  Timestamp watermark() const { return watermark_; }

  MailboxSnapshot read(std::span<const NodeId> nodes) const;

  /// Reduces the batch to one message per node and commits it. Throws
  /// OutOfOrder when any message predates an already committed one.
  void deliver(const MessageBatch& batch, unsigned workers = 1);

  /// Appends a mail to u's queue; ignored once the queue is full.
  void push_mail(NodeId u, const Eigen::Ref<const Eigen::VectorXd>& mail);
  std::int64_t mail_count(NodeId u) const;
  /// Mail i of node u (0 = oldest).
  Eigen::VectorXd mail(NodeId u, std::int64_t i) const;

 private:
  Eigen::MatrixXd message_;
  std::vector<Timestamp> message_time_;
  std::vector<std::uint8_t> has_message_;
  std::vector<Timestamp> last_update_;
  std::vector<std::vector<Eigen::VectorXd>> mails_;
  Timestamp watermark_ = 0.0;
  bool any_delivered_ = false;
};

/// Processes one chronological batch: returns the mailbox view for every node
/// touched by the batch as it stood before the batch, then absorbs the batch's
/// messages. Reads never observe messages from the batch itself.
MailboxSnapshot step_mailbox(Mailbox& mailbox, std::span<const Event> batch, const MessageBatch& messages,
                             unsigned workers = 1);

/// Distinct endpoints of a batch in ascending order.
std::vector<NodeId> touched_nodes(std::span<const Event> batch);

}  // namespace tempograph
