#include "tempograph/synthetic.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "tempograph/parallel.hpp"
#include "tempograph/recurrence.hpp"
#include "tempograph/rng.hpp"

namespace tempograph {

namespace {

constexpr const char* kModule = "synthetic_gen";
constexpr double kActivityFloor = 1e-6;

struct HistoryEntry {
  NodeId dst;
  Timestamp t;
};

}  // namespace

void validate(const SynthConfig& cfg) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidArgument, kModule, why); };
  if (cfg.num_nodes < 2) fail("node count must be >= 2");
  if (cfg.num_edges < 1) fail("edge count must be >= 1");
  if (cfg.timesteps < 1) fail("timestep count must be >= 1");
  if (cfg.num_edges % cfg.timesteps != 0) fail("edge count must be divisible by the timestep count");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) fail("alpha must lie in (0, 1]");
  if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) fail("beta must lie in [0, 1]");
  if (!(cfg.sigma >= 0.0) || !std::isfinite(cfg.mu)) fail("activity distribution parameters are invalid");
  if (!(cfg.time_jitter >= 0.0)) fail("time jitter must be non-negative");
  if (std::isnan(cfg.temperature)) fail("temperature must be a number");
  if (cfg.random_feat_dim < 0) fail("random feature dimension must be non-negative");
}

EventStream generate(const SynthConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const auto n = static_cast<std::size_t>(cfg.num_nodes);

  std::vector<double> activity(n);
  {
    std::normal_distribution<double> draw(cfg.mu, cfg.sigma);
    for (auto& c : activity) c = std::max(kActivityFloor, cfg.sigma > 0.0 ? draw(rng) : cfg.mu);
  }
  std::discrete_distribution<NodeId> by_activity(activity.begin(), activity.end());
  std::normal_distribution<double> jitter(0.0, cfg.time_jitter);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double log_alpha = std::log(cfg.alpha);
  const double temperature = cfg.effective_temperature();
  const std::int64_t per_step = cfg.num_edges / cfg.timesteps;

  std::vector<std::vector<HistoryEntry>> history(n);
  std::vector<double> weights;
  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(cfg.num_edges));

  auto draw_fresh = [&](NodeId src) {
    NodeId j = by_activity(rng);
    while (j == src) j = by_activity(rng);
    return j;
  };

  for (std::int64_t step = 1; step <= cfg.timesteps; ++step) {
    const auto t = static_cast<double>(step);
    for (std::int64_t k = 0; k < per_step; ++k) {
      const double te = std::max(0.0, t + (cfg.time_jitter > 0.0 ? jitter(rng) : 0.0));
      const NodeId src = by_activity(rng);
      auto& past = history[static_cast<std::size_t>(src)];
      NodeId dst;
      if (past.empty() || unit(rng) >= cfg.beta) {
        dst = draw_fresh(src);
      } else {
        // p(j) proportional to alpha^((t - t_e) / T), shifted so the largest
        // weight is 1.
        double newest = -std::numeric_limits<double>::infinity();
        for (const auto& h : past) newest = std::max(newest, h.t);
        weights.resize(past.size());
        double total = 0.0;
        for (std::size_t i = 0; i < past.size(); ++i) {
          weights[i] = std::exp(log_alpha * (newest - past[i].t) / temperature);
          total += weights[i];
        }
        if (cfg.debug_checks) {
          double sum = 0.0;
          for (double w : weights) sum += w / total;
          if (std::abs(sum - 1.0) > 1e-9) {
            throw Error(ErrorCode::InvalidArgument, kModule, "historical destination probabilities do not sum to 1");
          }
        }
        double r = unit(rng) * total;
        std::size_t pick = past.size() - 1;
        for (std::size_t i = 0; i < past.size(); ++i) {
          r -= weights[i];
          if (r < 0.0) {
            pick = i;
            break;
          }
        }
        dst = past[pick].dst;
      }
      past.push_back({dst, te});
      events.push_back(Event{src, dst, te, static_cast<EdgeId>(events.size())});
    }
  }

  EventStream stream;
  stream.num_nodes = cfg.num_nodes;
  std::vector<EdgeId> generation_order;
  sort_chronologically(events);
  for (std::size_t i = 0; i < events.size(); ++i) {
    generation_order.push_back(events[i].edge_id);
    events[i].edge_id = static_cast<EdgeId>(i);
  }
  stream.events = std::move(events);
  if (cfg.random_feat_dim > 0) {
    // Features are drawn per generated event, then follow it into sorted order.
    std::normal_distribution<double> feat(0.0, 1.0);
    Eigen::MatrixXd raw(cfg.num_edges, cfg.random_feat_dim);
    for (Eigen::Index r = 0; r < raw.rows(); ++r) {
      for (Eigen::Index c = 0; c < raw.cols(); ++c) raw(r, c) = feat(rng);
    }
    stream.edge_feat.resize(cfg.num_edges, cfg.random_feat_dim);
    for (std::size_t i = 0; i < generation_order.size(); ++i) {
      stream.edge_feat.row(static_cast<Eigen::Index>(i)) = raw.row(generation_order[i]);
    }
  }
  return stream;
}

std::vector<SweepRow> sweep(const SynthConfig& base, std::span<const double> alphas, std::span<const double> betas,
                            std::span<const std::uint64_t> seeds, const SweepOptions& options) {
  if (alphas.empty() || betas.empty() || seeds.empty()) {
    throw Error(ErrorCode::InvalidArgument, kModule, "sweep lists must be non-empty");
  }
  std::vector<SweepRow> rows;
  for (double a : alphas) {
    for (double b : betas) {
      for (std::uint64_t s : seeds) rows.push_back({a, b, s, 0.0, 0.0});
    }
  }
  for (const auto& row : rows) {
    SynthConfig cfg = base;
    cfg.alpha = row.alpha;
    cfg.beta = row.beta;
    validate(cfg);
  }
  parallel_chunks(static_cast<std::int64_t>(rows.size()), options.workers,
                  [&](std::int64_t begin, std::int64_t end, std::int64_t) {
                    for (std::int64_t r = begin; r < end; ++r) {
                      auto& row = rows[static_cast<std::size_t>(r)];
                      SynthConfig cfg = base;
                      cfg.alpha = row.alpha;
                      cfg.beta = row.beta;
                      cfg.seed = row.seed;
                      const auto g = build_tcsr(generate(cfg), /*symmetric=*/false);
                      RecurrenceOptions ro;
                      ro.bins = options.bins;
                      const auto m = recurrence_matrix(g, ro);
                      row.recurrence_density = m.density();
                      try {
                        row.phi = temporal_recency_ratio(m);
                      } catch (const Error& e) {
                        if (e.code() != ErrorCode::InsufficientData) throw;
                        row.phi = std::numeric_limits<double>::quiet_NaN();
                      }
                    }
                  });
  return rows;
}

}  // namespace tempograph
