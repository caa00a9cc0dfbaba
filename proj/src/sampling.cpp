#include "tempograph/sampling.hpp"

#include <algorithm>

#include "tempograph/parallel.hpp"
#include "tempograph/rng.hpp"

namespace tempograph {

namespace {

constexpr const char* kModule = "sampling";

void check_budget(std::int64_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, kModule, "sample budget k must be >= 1");
}

void fill_slot(const TemporalGraph& g, SampledNeighbors& out, std::int64_t row, std::int64_t slot,
               std::int64_t entry) {
  const auto p = static_cast<std::size_t>(entry);
  out.nodes(row, slot) = g.nbr_dst()[p];
  out.times(row, slot) = g.nbr_time()[p];
  out.edge_ids(row, slot) = g.nbr_edge_id()[p];
  out.valid(row, slot) = 1;
}

void check_query(const TemporalGraph& g, const SampleQuery& q) {
  if (q.node < 0 || q.node >= g.num_nodes()) {
    throw Error(ErrorCode::NodeOutOfRange, kModule, "query node " + std::to_string(q.node) + " out of range");
  }
}

/// Floyd's subset sampling: `take` distinct values in [0, n).
void choose_distinct(Rng& rng, std::int64_t n, std::int64_t take, std::vector<std::int64_t>& out) {
  out.clear();
  for (std::int64_t j = n - take; j < n; ++j) {
    std::uniform_int_distribution<std::int64_t> pick(0, j);
    const std::int64_t r = pick(rng);
    if (std::find(out.begin(), out.end(), r) == out.end()) {
      out.push_back(r);
    } else {
      out.push_back(j);
    }
  }
}

}  // namespace

SampledNeighbors::SampledNeighbors(std::int64_t num_queries, std::int64_t k)
    : nodes(RowArray<NodeId>::Constant(num_queries, k, kPaddingNode)),
      times(RowArray<Timestamp>::Zero(num_queries, k)),
      edge_ids(RowArray<EdgeId>::Constant(num_queries, k, kPaddingEdge)),
      valid(RowArray<std::uint8_t>::Zero(num_queries, k)) {}

std::int64_t SampledNeighbors::valid_count(std::int64_t row) const {
  return valid.row(row).cast<std::int64_t>().sum();
}

bool operator==(const SampledNeighbors& a, const SampledNeighbors& b) {
  if (a.nodes.rows() != b.nodes.rows() || a.nodes.cols() != b.nodes.cols()) return false;
  return (a.nodes == b.nodes).all() && (a.times == b.times).all() &&
         (a.edge_ids == b.edge_ids).all() && (a.valid == b.valid).all();
}

NeighborhoodSlice neighborhood(const TemporalGraph& g, NodeId node, Timestamp query_time) {
  const auto times = g.times(node);
  const auto it = std::lower_bound(times.begin(), times.end(), query_time);
  NeighborhoodSlice s;
  s.node = node;
  s.query_time = query_time;
  s.lo = g.begin(node);
  s.hi = s.lo + (it - times.begin());
  return s;
}

SampledNeighbors sample_most_recent(const TemporalGraph& g, std::span<const SampleQuery> queries,
                                    std::int64_t k, unsigned workers) {
  check_budget(k);
  const auto nq = static_cast<std::int64_t>(queries.size());
  SampledNeighbors out(nq, k);
  parallel_chunks(nq, workers, [&](std::int64_t begin, std::int64_t end, std::int64_t) {
    for (std::int64_t q = begin; q < end; ++q) {
      const auto& query = queries[static_cast<std::size_t>(q)];
      check_query(g, query);
      const auto slice = neighborhood(g, query.node, query.time);
      const std::int64_t take = std::min(k, slice.size());
      for (std::int64_t s = 0; s < take; ++s) fill_slot(g, out, q, s, slice.hi - 1 - s);
    }
  });
  return out;
}

SampledNeighbors sample_uniform(const TemporalGraph& g, std::span<const SampleQuery> queries,
                                std::int64_t k, std::uint64_t seed, unsigned workers) {
  check_budget(k);
  const auto nq = static_cast<std::int64_t>(queries.size());
  SampledNeighbors out(nq, k);
  parallel_chunks(nq, workers, [&](std::int64_t begin, std::int64_t end, std::int64_t) {
    std::vector<std::int64_t> picks;
    for (std::int64_t q = begin; q < end; ++q) {
      const auto& query = queries[static_cast<std::size_t>(q)];
      check_query(g, query);
      const auto slice = neighborhood(g, query.node, query.time);
      const std::int64_t n = slice.size();
      if (n <= k) {
        for (std::int64_t s = 0; s < n; ++s) fill_slot(g, out, q, s, slice.hi - 1 - s);
        continue;
      }
      Rng rng = make_stream(seed, static_cast<std::uint64_t>(q));
      choose_distinct(rng, n, k, picks);
      std::sort(picks.begin(), picks.end(), std::greater<>());
      for (std::int64_t s = 0; s < k; ++s) {
        fill_slot(g, out, q, s, slice.lo + picks[static_cast<std::size_t>(s)]);
      }
    }
  });
  return out;
}

SampledNeighbors sample(const TemporalGraph& g, std::span<const SampleQuery> queries, std::int64_t k,
                        SamplingStrategy strategy, std::uint64_t seed, unsigned workers) {
  return strategy == SamplingStrategy::MostRecent ? sample_most_recent(g, queries, k, workers)
                                                  : sample_uniform(g, queries, k, seed, workers);
}

LayeredSample sample_two_layer(const TemporalGraph& g, std::span<const SampleQuery> queries,
                               std::int64_t k1, std::int64_t k2, SamplingStrategy strategy,
                               std::uint64_t seed, unsigned workers) {
  check_budget(k1);
  check_budget(k2);
  LayeredSample result;
  result.layer1 = sample(g, queries, k1, strategy, seed, workers);

  const std::int64_t nq = result.layer1.num_queries();
  std::vector<SampleQuery> hop(static_cast<std::size_t>(nq * k1));
  std::vector<std::uint8_t> live(hop.size(), 0);
  for (std::int64_t q = 0; q < nq; ++q) {
    for (std::int64_t j = 0; j < k1; ++j) {
      const auto r = static_cast<std::size_t>(q * k1 + j);
      if (!result.layer1.valid(q, j)) continue;
      hop[r] = {result.layer1.nodes(q, j), result.layer1.times(q, j)};
      live[r] = 1;
    }
  }
  result.layer2 = sample(g, hop, k2, strategy, mix64(seed ^ 0x2ULL), workers);
  // Padding parents were queried as (node 0, t = 0), which yields an empty
  // slice; clear them anyway so the contract does not rely on that.
  for (std::size_t r = 0; r < hop.size(); ++r) {
    if (live[r]) continue;
    const auto row = static_cast<Eigen::Index>(r);
    result.layer2.nodes.row(row).setConstant(kPaddingNode);
    result.layer2.times.row(row).setZero();
    result.layer2.edge_ids.row(row).setConstant(kPaddingEdge);
    result.layer2.valid.row(row).setZero();
  }
  return result;
}

}  // namespace tempograph
