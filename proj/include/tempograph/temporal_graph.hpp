#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tempograph/common.hpp"

namespace tempograph {

/// One timestamped interaction. Edge features live in EventStream::edge_feat,
/// row `edge_id`.
struct Event {
  NodeId src = 0;
  NodeId dst = 0;
  Timestamp t = 0.0;
  EdgeId edge_id = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Chronologically ordered event list plus the graph-wide feature tables.
struct EventStream {
  std::vector<Event> events;
  std::int64_t num_nodes = 0;
  /// Either empty or one row per edge id.
  Eigen::MatrixXd edge_feat;
  /// Either empty or one row per node.
  Eigen::MatrixXd node_feat;

  std::int64_t edge_feat_dim() const { return edge_feat.cols(); }
};

/// Orders events by (t, edge_id).
bool chronological_less(const Event& a, const Event& b);

/// Stable chronological sort (t, then edge_id).
void sort_chronologically(std::vector<Event>& events);

/// Time-sorted compressed sparse row adjacency. Immutable after construction.
///
/// The neighbor list of node u occupies [offsets()[u], offsets()[u+1]) of the
/// parallel arrays and is ordered by (time, edge id). With symmetric storage
/// every event appears in both endpoint lists; `is_out(i)` tells whether the
/// owning node was the event's source.
class TemporalGraph {
 public:
  TemporalGraph() = default;

  std::int64_t num_nodes() const { return num_nodes_; }
  std::int64_t num_edges() const { return num_edges_; }
  /// Number of stored directed entries (2 * num_edges when symmetric).
  std::int64_t num_entries() const { return static_cast<std::int64_t>(nbr_dst_.size()); }
  bool symmetric() const { return symmetric_; }

  std::span<const std::int64_t> offsets() const { return offsets_; }
  std::span<const NodeId> nbr_dst() const { return nbr_dst_; }
  std::span<const Timestamp> nbr_time() const { return nbr_time_; }
  std::span<const EdgeId> nbr_edge_id() const { return nbr_edge_id_; }
  std::span<const std::uint8_t> nbr_is_out() const { return nbr_is_out_; }

  std::int64_t begin(NodeId u) const { return offsets_[static_cast<std::size_t>(u)]; }
  std::int64_t end(NodeId u) const { return offsets_[static_cast<std::size_t>(u) + 1]; }
  std::int64_t degree(NodeId u) const { return end(u) - begin(u); }

  std::span<const Timestamp> times(NodeId u) const {
    return nbr_time().subspan(static_cast<std::size_t>(begin(u)),
                              static_cast<std::size_t>(degree(u)));
  }
  std::span<const NodeId> neighbors(NodeId u) const {
    return nbr_dst().subspan(static_cast<std::size_t>(begin(u)),
                             static_cast<std::size_t>(degree(u)));
  }

  /// Empty when the graph is not bipartite-labelled; otherwise 0/1 per node.
  std::span<const std::int8_t> bipartite_class() const { return bipartite_class_; }
  bool has_bipartite_class() const { return !bipartite_class_.empty(); }

  const Eigen::MatrixXd& edge_feat() const { return edge_feat_; }
  const Eigen::MatrixXd& node_feat() const { return node_feat_; }

  Timestamp min_time() const { return min_time_; }
  Timestamp max_time() const { return max_time_; }

  friend TemporalGraph build_tcsr(const EventStream& stream, bool symmetric,
                                  std::optional<std::vector<std::int8_t>> classes);

 private:
  std::int64_t num_nodes_ = 0;
  std::int64_t num_edges_ = 0;
  bool symmetric_ = true;
  std::vector<std::int64_t> offsets_{0};
  std::vector<NodeId> nbr_dst_;
  std::vector<Timestamp> nbr_time_;
  std::vector<EdgeId> nbr_edge_id_;
  std::vector<std::uint8_t> nbr_is_out_;
  std::vector<std::int8_t> bipartite_class_;
  Eigen::MatrixXd edge_feat_;
  Eigen::MatrixXd node_feat_;
  Timestamp min_time_ = 0.0;
  Timestamp max_time_ = 0.0;
};

/// Builds the T-CSR. Events need not be sorted; ties on equal timestamps are
/// broken by edge id. Throws NodeOutOfRange / FeatureDimension / InvalidArgument.
TemporalGraph build_tcsr(const EventStream& stream, bool symmetric = true,
                         std::optional<std::vector<std::int8_t>> classes = std::nullopt);

/// Recovers the event list (sorted by edge id) from a graph.
std::vector<Event> flatten(const TemporalGraph& g);

/// Labels nodes 0 (appears only as source) / 1 (only as destination) when the
/// source and destination sets are disjoint. Nodes that never appear get the
/// class 0. Returns nullopt for non-bipartite graphs.
std::optional<std::vector<std::int8_t>> infer_bipartite_classes(
    std::span<const Event> events, std::int64_t num_nodes);

struct GraphStats {
  std::int64_t num_nodes = 0;
  std::int64_t num_edges = 0;
  std::int64_t d_v = 0;
  std::int64_t d_e = 0;
  double avg_degree = 0.0;
  Timestamp max_t = 0.0;
};

/// avg_degree = undirected edge count / node count.
GraphStats stats(const TemporalGraph& g);

/// The k chronologically latest events, in chronological order.
std::vector<Event> truncate_last(std::span<const Event> events, std::int64_t k);

}  // namespace tempograph
