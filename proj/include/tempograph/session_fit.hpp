#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tempograph/temporal_graph.hpp"

namespace tempograph {

/// One Gaussian on the log10(gap) axis.
struct GaussianComponent {
  double mean = 0.0;
  double stddev = 1.0;
  double weight = 0.5;

  double density(double x) const;
};

struct SessionFit {
  /// Histogram of log10 gaps, normalised to unit area.
  Eigen::VectorXd bin_centers;
  Eigen::VectorXd density;
  /// Components ordered by mean; weights sum to 1.
  GaussianComponent short_gap;
  GaussianComponent long_gap;
  /// Intersection of the weighted components between the two means.
  double threshold_log10 = 0.0;
  /// Inactivity threshold t_T in dataset time units.
  double threshold = 0.0;
  double squared_error = 0.0;
  std::int64_t num_gaps = 0;

  double mixture(double x) const { return short_gap.density(x) + long_gap.density(x); }
};

/// Gaps between consecutive events of the same (source, destination) pair.
/// Only outgoing entries are scanned; zero gaps are kept.
std::vector<double> pair_gaps(const TemporalGraph& g);

/// Fits a two-component Gaussian mixture to the log10 histogram of the
/// positive gaps by least squares (grid search, then simplex refinement).
/// Throws InsufficientData when fewer than num_bins/4 bins are populated,
/// SingleMode when the components do not separate or never cross between
/// their means.
SessionFit fit_session_gaps(std::span<const double> gaps, std::int64_t num_bins = 50);

SessionFit session_fit(const TemporalGraph& g, std::int64_t num_bins = 50);

}  // namespace tempograph
