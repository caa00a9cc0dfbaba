#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tempograph/temporal_graph.hpp"

namespace tempograph {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// B x B counts of same-(source, destination) event pairs, indexed by the
/// time bins of the earlier and later event.
struct RecurrenceMatrix {
  std::int64_t bins = 0;
  CountMatrix counts;
  Timestamp t_min = 0.0;
  Timestamp t_max = 0.0;
  /// Number of same-source event pairs that were scanned (repeat or not).
  std::int64_t candidate_pairs = 0;

  double bin_width() const { return (t_max - t_min) / static_cast<double>(bins); }
  std::int64_t total() const { return counts.sum(); }
  /// total / candidate_pairs, 0 when nothing was scanned.
  double density() const;
};

struct RecurrenceOptions {
  std::int64_t bins = 100;
  /// Scan only the first `clip_degree` outgoing entries per node.
  std::optional<std::int64_t> clip_degree;
  /// Time range override; defaults to the graph's [min_time, max_time].
  std::optional<std::pair<Timestamp, Timestamp>> range;
  unsigned workers = 1;
};

/// bin(t) = floor((t - t_min) / width), clamped to [0, B-1].
std::int64_t time_bin(Timestamp t, Timestamp t_min, double width, std::int64_t bins);

/// Scans every node's outgoing T-CSR entries (the entries whose owner is the
/// event source) and counts each pair i < j sharing a destination at
/// counts[bin(t_i)][bin(t_j)]. Throws DegenerateRange when t_max == t_min.
RecurrenceMatrix recurrence_matrix(const TemporalGraph& g, const RecurrenceOptions& options = {});

/// counts / total (all zeros when total == 0).
Eigen::MatrixXd normalized(const RecurrenceMatrix& m);

/// Mean of the tau-th superdiagonal of the normalized matrix, 1 <= tau <= B-1.
double recurrence_rate(const RecurrenceMatrix& m, std::int64_t tau);

/// RR_1 .. RR_{B-1}.
std::vector<double> recurrence_profile(const RecurrenceMatrix& m);

/// phi = sum_{i=1..bins} RR_i / sum_{j<=i} RR_j with RR_i = 0 past the end of
/// `rr` (rr[0] is RR_1). Terms with a zero prefix sum are skipped. Throws
/// InsufficientData when every RR is zero.
double temporal_recency_ratio(std::span<const double> rr, std::int64_t bins);

/// Same, from a matrix (rr of length B-1 summed to B).
double temporal_recency_ratio(const RecurrenceMatrix& m);

struct RecencyProfile {
  std::vector<double> rr;
  double phi = 0.0;
};

RecencyProfile recency_profile(const RecurrenceMatrix& m);

/// Matrix CSV: B rows of B comma-separated integers.
void write_matrix_csv(std::ostream& out, const RecurrenceMatrix& m);

/// Binary PGM (P5, maxval 255), row-major. Values are clipped at the 99th
/// percentile of the non-zero cells, then scaled to [0, 255].
void write_heatmap_pgm(std::ostream& out, const RecurrenceMatrix& m, double percentile = 0.99);

}  // namespace tempograph
