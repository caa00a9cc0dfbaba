#include "tempograph/session_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tempograph/nelder_mead.hpp"

namespace tempograph {

namespace {

constexpr const char* kModule = "session_fit";

// Two components count as one mode below this separation (Ashman's D) or
// weight.
constexpr double kMinSeparation = 2.0;
constexpr double kMinWeight = 0.05;

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

struct Params {
  double mu1, mu2, sd1, sd2, w1;
};

double squared_error(const Params& p, const Eigen::VectorXd& x, const Eigen::VectorXd& h) {
  double err = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double f = p.w1 * normal_pdf(x[i], p.mu1, p.sd1) + (1.0 - p.w1) * normal_pdf(x[i], p.mu2, p.sd2);
    err += (h[i] - f) * (h[i] - f);
  }
  return err;
}

// Unconstrained coordinates: (mu1, mu2, log(sd1 - floor), log(sd2 - floor), logit(w1)).
Params decode(const Eigen::VectorXd& v, double sd_floor) {
  return {v[0], v[1], sd_floor + std::exp(v[2]), sd_floor + std::exp(v[3]), 1.0 / (1.0 + std::exp(-v[4]))};
}

Eigen::VectorXd encode(const Params& p, double sd_floor) {
  Eigen::VectorXd v(5);
  v << p.mu1, p.mu2, std::log(std::max(p.sd1 - sd_floor, 1e-12)), std::log(std::max(p.sd2 - sd_floor, 1e-12)),
      std::log(p.w1 / (1.0 - p.w1));
  return v;
}

}  // namespace

double GaussianComponent::density(double x) const { return weight * normal_pdf(x, mean, stddev); }

std::vector<double> pair_gaps(const TemporalGraph& g) {
  std::vector<double> gaps;
  std::vector<std::pair<NodeId, Timestamp>> entries;
  const auto dst = g.nbr_dst();
  const auto time = g.nbr_time();
  const auto is_out = g.nbr_is_out();
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    entries.clear();
    for (std::int64_t i = g.begin(u); i < g.end(u); ++i) {
      const auto p = static_cast<std::size_t>(i);
      if (is_out[p]) entries.emplace_back(dst[p], time[p]);
    }
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (entries[i].first == entries[i - 1].first) gaps.push_back(entries[i].second - entries[i - 1].second);
    }
  }
  return gaps;
}

SessionFit fit_session_gaps(std::span<const double> gaps, std::int64_t num_bins) {
  if (num_bins < 4) throw Error(ErrorCode::InvalidArgument, kModule, "need at least 4 histogram bins");
  std::vector<double> logs;
  logs.reserve(gaps.size());
  for (double gap : gaps) {
    if (gap > 0.0 && std::isfinite(gap)) logs.push_back(std::log10(gap));
  }
  if (logs.empty()) throw Error(ErrorCode::InsufficientData, kModule, "no positive gaps between repeated pairs");

  SessionFit fit;
  fit.num_gaps = static_cast<std::int64_t>(logs.size());
  const auto [lo_it, hi_it] = std::minmax_element(logs.begin(), logs.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi - lo < 1e-9) {
    // All gaps equal: the floored sigma collapses both components onto one point.
    throw Error(ErrorCode::SingleMode, kModule, "all gaps are equal; no second mode");
  }

  const double width = (hi - lo) / static_cast<double>(num_bins);
  fit.bin_centers.resize(num_bins);
  fit.density = Eigen::VectorXd::Zero(num_bins);
  for (std::int64_t b = 0; b < num_bins; ++b) fit.bin_centers[b] = lo + (static_cast<double>(b) + 0.5) * width;
  for (double x : logs) {
    const auto b = std::min<std::int64_t>(static_cast<std::int64_t>((x - lo) / width), num_bins - 1);
    fit.density[b] += 1.0;
  }
  const auto populated = (fit.density.array() > 0.0).count();
  if (populated * 4 < num_bins) {
    throw Error(ErrorCode::InsufficientData, kModule,
                "only " + std::to_string(populated) + " of " + std::to_string(num_bins) + " bins populated");
  }
  fit.density /= static_cast<double>(logs.size()) * width;

  const double sd_floor = 0.5 * width;
  const double span = hi - lo;

  // Coarse grid.
  Params best{};
  double best_err = std::numeric_limits<double>::infinity();
  constexpr int kMeanSteps = 16;
  const double sds[] = {span / 40.0, span / 16.0, span / 8.0, span / 4.0};
  const double weights[] = {0.2, 0.35, 0.5, 0.65, 0.8};
  for (int a = 0; a < kMeanSteps; ++a) {
    for (int b = a + 1; b < kMeanSteps; ++b) {
      const double mu1 = lo + span * (a + 0.5) / kMeanSteps;
      const double mu2 = lo + span * (b + 0.5) / kMeanSteps;
      for (double s1 : sds) {
        for (double s2 : sds) {
          for (double w : weights) {
            const Params p{mu1, mu2, std::max(s1, sd_floor * 1.01), std::max(s2, sd_floor * 1.01), w};
            const double err = squared_error(p, fit.bin_centers, fit.density);
            if (err < best_err) {
              best_err = err;
              best = p;
            }
          }
        }
      }
    }
  }

  // Local refinement, restarted once from the optimum.
  auto objective = [&](const Eigen::VectorXd& v) { return squared_error(decode(v, sd_floor), fit.bin_centers, fit.density); };
  Eigen::VectorXd v = encode(best, sd_floor);
  for (int round = 0; round < 2; ++round) v = nelder_mead<double>(objective, v, {4000, 1e-14, 0.1}).x;
  Params p = decode(v, sd_floor);
  fit.squared_error = squared_error(p, fit.bin_centers, fit.density);

  GaussianComponent c1{p.mu1, p.sd1, p.w1};
  GaussianComponent c2{p.mu2, p.sd2, 1.0 - p.w1};
  if (c1.mean > c2.mean) std::swap(c1, c2);
  fit.short_gap = c1;
  fit.long_gap = c2;

  const double separation = std::sqrt(2.0) * (c2.mean - c1.mean) / std::sqrt(c1.stddev * c1.stddev + c2.stddev * c2.stddev);
  if (separation < kMinSeparation || std::min(c1.weight, c2.weight) < kMinWeight) {
    throw Error(ErrorCode::SingleMode, kModule, "mixture components merged into a single mode");
  }

  // Crossing of the weighted components between the means; take the one at
  // the lowest mixture density if there are several.
  auto diff = [&](double x) { return c1.density(x) - c2.density(x); };
  constexpr int kScan = 2000;
  double crossing = std::numeric_limits<double>::quiet_NaN();
  double crossing_density = std::numeric_limits<double>::infinity();
  double prev_x = c1.mean;
  double prev_d = diff(prev_x);
  for (int i = 1; i <= kScan; ++i) {
    const double x = c1.mean + (c2.mean - c1.mean) * i / kScan;
    const double d = diff(x);
    if ((prev_d > 0.0) != (d > 0.0)) {
      double a = prev_x, b = x;
      for (int k = 0; k < 100; ++k) {
        const double m = 0.5 * (a + b);
        if ((diff(m) > 0.0) == (prev_d > 0.0)) a = m; else b = m;
      }
      const double root = 0.5 * (a + b);
      if (fit.mixture(root) < crossing_density) {
        crossing = root;
        crossing_density = fit.mixture(root);
      }
    }
    prev_x = x;
    prev_d = d;
  }
  if (std::isnan(crossing)) {
    throw Error(ErrorCode::SingleMode, kModule, "components do not intersect between their means");
  }
  fit.threshold_log10 = crossing;
  fit.threshold = std::pow(10.0, crossing);
  return fit;
}

SessionFit session_fit(const TemporalGraph& g, std::int64_t num_bins) {
  const auto gaps = pair_gaps(g);
  if (gaps.empty()) throw Error(ErrorCode::InsufficientData, kModule, "no (source, destination) pair repeats");
  return fit_session_gaps(gaps, num_bins);
}

}  // namespace tempograph
