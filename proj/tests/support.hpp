#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "tempograph/temporal_graph.hpp"

namespace tempograph::fixtures {

/// Random events with integer timestamps in [0, max_t] so ties are common.
inline EventStream random_stream(std::mt19937_64& rng, std::int64_t num_nodes, std::int64_t num_events,
                                 int max_t = 50, bool self_loops = false) {
  std::uniform_int_distribution<NodeId> node(0, num_nodes - 1);
  std::uniform_int_distribution<int> time(0, max_t);
  EventStream s;
  s.num_nodes = num_nodes;
  for (std::int64_t i = 0; i < num_events; ++i) {
    NodeId u = node(rng);
    NodeId v = node(rng);
    while (!self_loops && v == u && num_nodes > 1) v = node(rng);
    s.events.push_back({u, v, static_cast<double>(time(rng)), i});
  }
  sort_chronologically(s.events);
  return s;
}

}  // namespace tempograph::fixtures
