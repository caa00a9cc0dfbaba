#include "tempograph/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "tempograph/parallel.hpp"

namespace tempograph {

namespace {
constexpr const char* kModule = "recurrence_analysis";
}

double RecurrenceMatrix::density() const {
  return candidate_pairs > 0 ? static_cast<double>(total()) / static_cast<double>(candidate_pairs) : 0.0;
}

std::int64_t time_bin(Timestamp t, Timestamp t_min, double width, std::int64_t bins) {
  const double b = std::floor((t - t_min) / width);
  if (!(b > 0.0)) return 0;
  return std::min<std::int64_t>(static_cast<std::int64_t>(b), bins - 1);
}

RecurrenceMatrix recurrence_matrix(const TemporalGraph& g, const RecurrenceOptions& options) {
  if (options.bins < 2) throw Error(ErrorCode::InvalidArgument, kModule, "bin count must be >= 2");
  if (g.num_edges() == 0) throw Error(ErrorCode::InsufficientData, kModule, "graph has no events");
  if (options.clip_degree && *options.clip_degree < 0) {
    throw Error(ErrorCode::InvalidArgument, kModule, "clip degree must be non-negative");
  }

  RecurrenceMatrix m;
  m.bins = options.bins;
  std::tie(m.t_min, m.t_max) =
      options.range.value_or(std::pair<Timestamp, Timestamp>{g.min_time(), g.max_time()});
  if (!(m.t_max > m.t_min)) {
    throw Error(ErrorCode::DegenerateRange, kModule, "time range is empty (t_max == t_min)");
  }
  const double width = m.bin_width();
  const std::int64_t bins = m.bins;

  const unsigned workers = options.workers == 0 ? default_workers() : options.workers;
  const auto chunks = static_cast<std::size_t>(std::max<std::int64_t>(1, std::min<std::int64_t>(workers, g.num_nodes())));
  std::vector<CountMatrix> partial(chunks, CountMatrix::Zero(bins, bins));
  std::vector<std::int64_t> partial_pairs(chunks, 0);

  parallel_chunks(g.num_nodes(), workers, [&](std::int64_t begin, std::int64_t end, std::int64_t c) {
    auto& counts = partial[static_cast<std::size_t>(c)];
    auto& pairs = partial_pairs[static_cast<std::size_t>(c)];
    std::vector<std::pair<NodeId, std::int64_t>> entries;  // (destination, bin)
    std::vector<std::pair<std::int64_t, std::int64_t>> hist;  // (bin, count)
    const auto dst = g.nbr_dst();
    const auto time = g.nbr_time();
    const auto is_out = g.nbr_is_out();
    for (NodeId u = begin; u < end; ++u) {
      entries.clear();
      for (std::int64_t i = g.begin(u); i < g.end(u); ++i) {
        const auto p = static_cast<std::size_t>(i);
        if (!is_out[p]) continue;
        if (options.clip_degree && static_cast<std::int64_t>(entries.size()) >= *options.clip_degree) break;
        entries.emplace_back(dst[p], time_bin(time[p], m.t_min, width, bins));
      }
      const auto n = static_cast<std::int64_t>(entries.size());
      pairs += n * (n - 1) / 2;
      // Entries are chronological, so within one destination the bins are
      // non-decreasing and every pair (i < j) maps to counts[b_i][b_j] with
      // b_i <= b_j. Count per bin instead of per pair.
      std::stable_sort(entries.begin(), entries.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t lo = 0; lo < entries.size();) {
        std::size_t hi = lo;
        hist.clear();
        while (hi < entries.size() && entries[hi].first == entries[lo].first) {
          if (!hist.empty() && hist.back().first == entries[hi].second) {
            ++hist.back().second;
          } else {
            hist.emplace_back(entries[hi].second, 1);
          }
          ++hi;
        }
        for (std::size_t a = 0; a < hist.size(); ++a) {
          const auto [ba, ca] = hist[a];
          counts(ba, ba) += ca * (ca - 1) / 2;
          for (std::size_t b = a + 1; b < hist.size(); ++b) counts(ba, hist[b].first) += ca * hist[b].second;
        }
        lo = hi;
      }
    }
  });

  m.counts = CountMatrix::Zero(bins, bins);
  for (std::size_t c = 0; c < chunks; ++c) {
    m.counts += partial[c];
    m.candidate_pairs += partial_pairs[c];
  }
  return m;
}

Eigen::MatrixXd normalized(const RecurrenceMatrix& m) {
  const std::int64_t total = m.total();
  Eigen::MatrixXd r = m.counts.cast<double>();
  if (total > 0) r /= static_cast<double>(total);
  return r;
}

double recurrence_rate(const RecurrenceMatrix& m, std::int64_t tau) {
  if (tau < 1 || tau > m.bins - 1) {
    throw Error(ErrorCode::InvalidArgument, kModule,
                "tau must lie in [1, " + std::to_string(m.bins - 1) + "]");
  }
  const std::int64_t total = m.total();
  if (total == 0) return 0.0;
  const auto diag = m.counts.diagonal(tau);
  return static_cast<double>(diag.sum()) / static_cast<double>(total) / static_cast<double>(m.bins - tau);
}

std::vector<double> recurrence_profile(const RecurrenceMatrix& m) {
  std::vector<double> rr;
  rr.reserve(static_cast<std::size_t>(m.bins - 1));
  for (std::int64_t tau = 1; tau < m.bins; ++tau) rr.push_back(recurrence_rate(m, tau));
  return rr;
}

double temporal_recency_ratio(std::span<const double> rr, std::int64_t bins) {
  double prefix = 0.0;
  double phi = 0.0;
  bool any = false;
  for (std::int64_t i = 0; i < bins; ++i) {
    const double value = i < static_cast<std::int64_t>(rr.size()) ? rr[static_cast<std::size_t>(i)] : 0.0;
    if (value < 0.0) throw Error(ErrorCode::InvalidArgument, kModule, "recurrence rates must be non-negative");
    prefix += value;
    if (prefix > 0.0) {
      phi += value / prefix;
      any = true;
    }
  }
  if (!any) {
    throw Error(ErrorCode::InsufficientData, kModule,
                "recency ratio undefined: no recurrence at any positive lag");
  }
  return phi;
}

double temporal_recency_ratio(const RecurrenceMatrix& m) {
  return temporal_recency_ratio(recurrence_profile(m), m.bins);
}

RecencyProfile recency_profile(const RecurrenceMatrix& m) {
  RecencyProfile p;
  p.rr = recurrence_profile(m);
  p.phi = temporal_recency_ratio(p.rr, m.bins);
  return p;
}

void write_matrix_csv(std::ostream& out, const RecurrenceMatrix& m) {
  for (Eigen::Index i = 0; i < m.counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.counts.cols(); ++j) {
      if (j) out << ',';
      out << m.counts(i, j);
    }
    out << '\n';
  }
}

void write_heatmap_pgm(std::ostream& out, const RecurrenceMatrix& m, double percentile) {
  std::vector<std::int64_t> nonzero;
  for (Eigen::Index k = 0; k < m.counts.size(); ++k) {
    if (m.counts.data()[k] > 0) nonzero.push_back(m.counts.data()[k]);
  }
  double cap = 0.0;
  if (!nonzero.empty()) {
    std::sort(nonzero.begin(), nonzero.end());
    // Nearest-rank percentile.
    const auto rank = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(nonzero.size())));
    cap = static_cast<double>(nonzero[std::clamp<std::size_t>(rank, 1, nonzero.size()) - 1]);
  }
  out << "P5\n" << m.counts.cols() << ' ' << m.counts.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < m.counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.counts.cols(); ++j) {
      const double v = cap > 0.0 ? std::min(static_cast<double>(m.counts(i, j)), cap) / cap : 0.0;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
}

}  // namespace tempograph
