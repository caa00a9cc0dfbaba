#include "tempograph/temporal_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tempograph {

namespace {
constexpr const char* kModule = "temporal_graph";
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::NodeOutOfRange: return "node_out_of_range";
    case ErrorCode::FeatureDimension: return "feature_dimension";
    case ErrorCode::MalformedInput: return "malformed_input";
    case ErrorCode::DegenerateRange: return "degenerate_range";
    case ErrorCode::OutOfOrder: return "out_of_order";
    case ErrorCode::MissingFeature: return "missing_feature";
    case ErrorCode::InsufficientData: return "insufficient_data";
    case ErrorCode::SingleMode: return "single_mode";
    case ErrorCode::EmptySplit: return "empty_split";
    case ErrorCode::PoolTooSmall: return "pool_too_small";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

bool chronological_less(const Event& a, const Event& b) {
  if (a.t != b.t) return a.t < b.t;
  return a.edge_id < b.edge_id;
}

void sort_chronologically(std::vector<Event>& events) {
  std::stable_sort(events.begin(), events.end(), chronological_less);
}

TemporalGraph build_tcsr(const EventStream& stream, bool symmetric,
                         std::optional<std::vector<std::int8_t>> classes) {
  const auto& events = stream.events;
  const std::int64_t n = stream.num_nodes;
  if (n < 0) throw Error(ErrorCode::InvalidArgument, kModule, "negative node count");

  EdgeId max_edge_id = -1;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      throw Error(ErrorCode::NodeOutOfRange, kModule,
                  "event " + std::to_string(i) + " references node outside [0, " +
                      std::to_string(n) + ")");
    }
    if (!(e.t >= 0.0) || !std::isfinite(e.t)) {
      throw Error(ErrorCode::InvalidArgument, kModule,
                  "event " + std::to_string(i) + " has a negative or non-finite timestamp");
    }
    if (e.edge_id < 0) {
      throw Error(ErrorCode::InvalidArgument, kModule,
                  "event " + std::to_string(i) + " has a negative edge id");
    }
    max_edge_id = std::max(max_edge_id, e.edge_id);
  }
  {
    std::vector<bool> seen(static_cast<std::size_t>(max_edge_id + 1), false);
    for (const Event& e : events) {
      if (seen[static_cast<std::size_t>(e.edge_id)]) {
        throw Error(ErrorCode::InvalidArgument, kModule,
                    "duplicate edge id " + std::to_string(e.edge_id));
      }
      seen[static_cast<std::size_t>(e.edge_id)] = true;
    }
  }
  if (stream.edge_feat.size() > 0 && stream.edge_feat.rows() <= max_edge_id) {
    throw Error(ErrorCode::FeatureDimension, kModule,
                "edge feature table has " + std::to_string(stream.edge_feat.rows()) +
                    " rows but edge ids reach " + std::to_string(max_edge_id));
  }
  if (stream.node_feat.size() > 0 && stream.node_feat.rows() != n) {
    throw Error(ErrorCode::FeatureDimension, kModule,
                "node feature table rows do not match node count");
  }
  if (classes && static_cast<std::int64_t>(classes->size()) != n) {
    throw Error(ErrorCode::InvalidArgument, kModule,
                "bipartite class vector length does not match node count");
  }

  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return chronological_less(events[a], events[b]);
  });

  TemporalGraph g;
  g.num_nodes_ = n;
  g.num_edges_ = static_cast<std::int64_t>(events.size());
  g.symmetric_ = symmetric;
  g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const Event& e : events) {
    ++g.offsets_[static_cast<std::size_t>(e.src) + 1];
    if (symmetric) ++g.offsets_[static_cast<std::size_t>(e.dst) + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());

  const auto total = static_cast<std::size_t>(g.offsets_.back());
  g.nbr_dst_.resize(total);
  g.nbr_time_.resize(total);
  g.nbr_edge_id_.resize(total);
  g.nbr_is_out_.resize(total);
  std::vector<std::int64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  auto place = [&](NodeId owner, NodeId other, const Event& e, bool out) {
    const auto pos = static_cast<std::size_t>(cursor[static_cast<std::size_t>(owner)]++);
    g.nbr_dst_[pos] = other;
    g.nbr_time_[pos] = e.t;
    g.nbr_edge_id_[pos] = e.edge_id;
    g.nbr_is_out_[pos] = out ? 1 : 0;
  };
  // Filling in chronological order leaves every segment sorted by (t, edge id).
  for (std::size_t idx : order) {
    const Event& e = events[idx];
    place(e.src, e.dst, e, true);
    if (symmetric) place(e.dst, e.src, e, false);
  }

  if (!events.empty()) {
    g.min_time_ = events[order.front()].t;
    g.max_time_ = events[order.back()].t;
  }
  if (classes) g.bipartite_class_ = std::move(*classes);
  g.edge_feat_ = stream.edge_feat;
  g.node_feat_ = stream.node_feat;
  return g;
}

std::vector<Event> flatten(const TemporalGraph& g) {
  std::vector<Event> out;
  out.reserve(static_cast<std::size_t>(g.num_edges()));
  const auto dst = g.nbr_dst();
  const auto time = g.nbr_time();
  const auto eid = g.nbr_edge_id();
  const auto is_out = g.nbr_is_out();
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (std::int64_t i = g.begin(u); i < g.end(u); ++i) {
      const auto p = static_cast<std::size_t>(i);
      if (is_out[p]) out.push_back(Event{u, dst[p], time[p], eid[p]});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Event& a, const Event& b) { return a.edge_id < b.edge_id; });
  return out;
}

std::optional<std::vector<std::int8_t>> infer_bipartite_classes(
    std::span<const Event> events, std::int64_t num_nodes) {
  std::vector<std::uint8_t> role(static_cast<std::size_t>(num_nodes), 0);
  for (const Event& e : events) {
    role[static_cast<std::size_t>(e.src)] |= 1;
    role[static_cast<std::size_t>(e.dst)] |= 2;
  }
  std::vector<std::int8_t> classes(role.size(), 0);
  for (std::size_t i = 0; i < role.size(); ++i) {
    if (role[i] == 3) return std::nullopt;
    classes[i] = role[i] == 2 ? 1 : 0;
  }
  return classes;
}

GraphStats stats(const TemporalGraph& g) {
  GraphStats s;
  s.num_nodes = g.num_nodes();
  s.num_edges = g.num_edges();
  s.d_v = g.node_feat().cols();
  s.d_e = g.edge_feat().cols();
  s.avg_degree = s.num_nodes > 0
                     ? static_cast<double>(s.num_edges) / static_cast<double>(s.num_nodes)
                     : 0.0;
  s.max_t = g.max_time();
  return s;
}

std::vector<Event> truncate_last(std::span<const Event> events, std::int64_t k) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, kModule, "k must be non-negative");
  std::vector<Event> sorted(events.begin(), events.end());
  sort_chronologically(sorted);
  const auto keep = std::min<std::size_t>(sorted.size(), static_cast<std::size_t>(k));
  return {sorted.end() - static_cast<std::ptrdiff_t>(keep), sorted.end()};
}

}  // namespace tempograph
