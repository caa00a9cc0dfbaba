#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tempograph/temporal_graph.hpp"

namespace tempograph {

/// Neighbors of `node` strictly before `query_time`: absolute entry indices
/// [lo, hi) into the graph's T-CSR arrays. lo is the start of the node's
/// segment.
struct NeighborhoodSlice {
  NodeId node = 0;
  Timestamp query_time = 0.0;
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  std::int64_t size() const { return hi - lo; }
  bool empty() const { return hi == lo; }
};

/// Binary search on the node's timestamps; strict bound t < query_time.
NeighborhoodSlice neighborhood(const TemporalGraph& g, NodeId node, Timestamp query_time);

struct SampleQuery {
  NodeId node = 0;
  Timestamp time = 0.0;
};

template <typename T>
using RowArray = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Fixed-width sampler output, one row per query. Padding slots carry
/// kPaddingNode / kPaddingEdge, time 0 and valid 0.
struct SampledNeighbors {
  RowArray<NodeId> nodes;
  RowArray<Timestamp> times;
  RowArray<EdgeId> edge_ids;
  RowArray<std::uint8_t> valid;

  SampledNeighbors() = default;
  SampledNeighbors(std::int64_t num_queries, std::int64_t k);

  std::int64_t num_queries() const { return nodes.rows(); }
  std::int64_t budget() const { return nodes.cols(); }
  std::int64_t valid_count(std::int64_t row) const;

  friend bool operator==(const SampledNeighbors& a, const SampledNeighbors& b);
};

enum class SamplingStrategy { MostRecent, Uniform };

/// The min(k, |N|) latest neighbors per query, newest first. Equal timestamps
/// resolve towards the larger edge id.
SampledNeighbors sample_most_recent(const TemporalGraph& g, std::span<const SampleQuery> queries,
                                    std::int64_t k, unsigned workers = 1);

/// min(k, |N|) distinct positions drawn uniformly without replacement. Query q
/// uses the RNG stream stream_seed(seed, q), so the result does not depend on
/// the worker count.
SampledNeighbors sample_uniform(const TemporalGraph& g, std::span<const SampleQuery> queries,
                                std::int64_t k, std::uint64_t seed, unsigned workers = 1);

SampledNeighbors sample(const TemporalGraph& g, std::span<const SampleQuery> queries,
                        std::int64_t k, SamplingStrategy strategy, std::uint64_t seed,
                        unsigned workers = 1);

/// Two hops. layer2 has num_queries * k1 rows; row q * k1 + j samples around
/// layer1 entry (q, j) at that entry's own timestamp. Padding entries produce
/// padding rows.
struct LayeredSample {
  SampledNeighbors layer1;
  SampledNeighbors layer2;
};

LayeredSample sample_two_layer(const TemporalGraph& g, std::span<const SampleQuery> queries,
                               std::int64_t k1, std::int64_t k2, SamplingStrategy strategy,
                               std::uint64_t seed, unsigned workers = 1);

}  // namespace tempograph
