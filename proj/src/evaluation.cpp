#include "tempograph/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tempograph/rng.hpp"

namespace tempograph {

namespace {

constexpr const char* kModule = "evaluation";

bool touches(const Event& e, const std::vector<NodeId>& sorted_nodes) {
  return std::binary_search(sorted_nodes.begin(), sorted_nodes.end(), e.src) ||
         std::binary_search(sorted_nodes.begin(), sorted_nodes.end(), e.dst);
}

}  // namespace

SplitResult split(std::span<const Event> events, const SplitSpec& spec) {
  const double fracs[] = {spec.train_frac, spec.valid_frac, spec.test_frac};
  for (double f : fracs) {
    if (!(f >= 0.0)) throw Error(ErrorCode::InvalidArgument, kModule, "split fractions must be non-negative");
  }
  if (std::abs(spec.train_frac + spec.valid_frac + spec.test_frac - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, kModule, "split fractions must sum to 1");
  }
  if (spec.mode == SplitMode::Inductive && !(spec.inductive_mask_frac > 0.0 && spec.inductive_mask_frac < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, kModule, "inductive mask fraction must lie in (0, 1)");
  }
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].t < events[i - 1].t) {
      throw Error(ErrorCode::OutOfOrder, kModule, "events must be chronologically ordered");
    }
  }

  const auto n = static_cast<double>(events.size());
  SplitResult r;
  r.train_end = std::llround(n * spec.train_frac);
  r.valid_end = std::llround(n * (spec.train_frac + spec.valid_frac));
  r.train.assign(events.begin(), events.begin() + r.train_end);
  r.valid.assign(events.begin() + r.train_end, events.begin() + r.valid_end);
  r.test.assign(events.begin() + r.valid_end, events.end());
  r.test_inductive.assign(r.test.size(), 0);

  if (spec.mode == SplitMode::Inductive) {
    std::vector<NodeId> test_nodes;
    for (const Event& e : r.test) {
      test_nodes.push_back(e.src);
      test_nodes.push_back(e.dst);
    }
    std::sort(test_nodes.begin(), test_nodes.end());
    test_nodes.erase(std::unique(test_nodes.begin(), test_nodes.end()), test_nodes.end());
    if (!test_nodes.empty()) {
      Rng rng(stream_seed(spec.seed, 0x1d));
      std::shuffle(test_nodes.begin(), test_nodes.end(), rng);
      const auto count = std::clamp<std::int64_t>(
          std::llround(spec.inductive_mask_frac * static_cast<double>(test_nodes.size())), 1,
          static_cast<std::int64_t>(test_nodes.size()));
      r.unseen_nodes.assign(test_nodes.begin(), test_nodes.begin() + count);
      std::sort(r.unseen_nodes.begin(), r.unseen_nodes.end());
    }
    std::erase_if(r.train, [&](const Event& e) { return touches(e, r.unseen_nodes); });
    for (std::size_t i = 0; i < r.test.size(); ++i) r.test_inductive[i] = touches(r.test[i], r.unseen_nodes) ? 1 : 0;
  }

  if (r.train.empty() || r.valid.empty() || r.test.empty()) {
    throw Error(ErrorCode::EmptySplit, kModule,
                "split produced an empty part (train " + std::to_string(r.train.size()) + ", valid " +
                    std::to_string(r.valid.size()) + ", test " + std::to_string(r.test.size()) + ")");
  }
  return r;
}

std::int64_t NegativeSpec::ratio(SplitPart part) const {
  switch (part) {
    case SplitPart::Train: return train_ratio;
    case SplitPart::Valid: return valid_ratio;
    case SplitPart::Test: return test_ratio;
  }
  return test_ratio;
}

NegativePool::NegativePool(std::int64_t num_nodes, std::span<const std::int8_t> classes, bool bipartite_aware)
    : num_nodes_(num_nodes), bipartite_(bipartite_aware && !classes.empty()) {
  if (!classes.empty() && static_cast<std::int64_t>(classes.size()) != num_nodes) {
    throw Error(ErrorCode::InvalidArgument, kModule, "class vector length does not match node count");
  }
  all_.resize(static_cast<std::size_t>(num_nodes));
  std::iota(all_.begin(), all_.end(), NodeId{0});
  if (bipartite_) {
    classes_.assign(classes.begin(), classes.end());
    for (NodeId u = 0; u < num_nodes; ++u) {
      const auto c = classes_[static_cast<std::size_t>(u)];
      if (c != 0 && c != 1) throw Error(ErrorCode::InvalidArgument, kModule, "bipartite class must be 0 or 1");
      by_class_[c].push_back(u);
    }
  }
}

std::span<const NodeId> NegativePool::eligible(NodeId src) const {
  if (!bipartite_) return all_;
  return by_class_[1 - classes_.at(static_cast<std::size_t>(src))];
}

std::vector<NodeId> sample_negatives(const Event& positive, const NegativePool& pool, std::int64_t ratio,
                                     std::uint64_t seed) {
  if (ratio < 1) throw Error(ErrorCode::InvalidArgument, kModule, "negative ratio must be >= 1");
  if (positive.src < 0 || positive.src >= pool.num_nodes()) {
    throw Error(ErrorCode::NodeOutOfRange, kModule, "source outside the negative pool");
  }
  const auto candidates = pool.eligible(positive.src);
  const auto dst_it = std::lower_bound(candidates.begin(), candidates.end(), positive.dst);
  const bool dst_in_pool = dst_it != candidates.end() && *dst_it == positive.dst;
  const auto dst_pos = dst_it - candidates.begin();
  const auto available = static_cast<std::int64_t>(candidates.size()) - (dst_in_pool ? 1 : 0);
  if (available < ratio) {
    throw Error(ErrorCode::PoolTooSmall, kModule,
                "only " + std::to_string(available) + " eligible negatives for ratio " + std::to_string(ratio));
  }

  // Floyd's algorithm over [0, available); indices at or past the true
  // destination shift by one to skip it.
  Rng rng = make_stream(seed, static_cast<std::uint64_t>(positive.edge_id));
  std::vector<std::int64_t> picks;
  picks.reserve(static_cast<std::size_t>(ratio));
  for (std::int64_t j = available - ratio; j < available; ++j) {
    std::uniform_int_distribution<std::int64_t> pick(0, j);
    const std::int64_t r = pick(rng);
    picks.push_back(std::find(picks.begin(), picks.end(), r) == picks.end() ? r : j);
  }
  std::vector<NodeId> out;
  out.reserve(picks.size());
  for (std::int64_t i : picks) {
    const auto idx = (dst_in_pool && i >= dst_pos) ? i + 1 : i;
    out.push_back(candidates[static_cast<std::size_t>(idx)]);
  }
  return out;
}

double reciprocal_rank(double positive, std::span<const double> negatives) {
  const auto above = std::count_if(negatives.begin(), negatives.end(), [&](double s) { return s >= positive; });
  return 1.0 / (1.0 + static_cast<double>(above));
}

double mrr(std::span<const RankingBatch> batches) {
  if (batches.empty()) throw Error(ErrorCode::InvalidArgument, kModule, "MRR of an empty ranking list");
  double sum = 0.0;
  for (const auto& b : batches) sum += reciprocal_rank(b.positive, b.negatives);
  return sum / static_cast<double>(batches.size());
}

double random_mrr(std::int64_t num_negatives) {
  double h = 0.0;
  for (std::int64_t r = 1; r <= num_negatives + 1; ++r) h += 1.0 / static_cast<double>(r);
  return h / static_cast<double>(num_negatives + 1);
}

}  // namespace tempograph
