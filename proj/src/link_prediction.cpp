#include "tempograph/link_prediction.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>

#include "tempograph/csv_io.hpp"
#include "tempograph/sampling.hpp"

namespace tempograph {

namespace {
constexpr const char* kModule = "evaluation";
}

EmbeddingScorer::EmbeddingScorer(EmbeddingMemory memory, const TemporalGraph& history, std::vector<NodeId> unseen,
                                 bool two_hop)
    : memory_(std::move(memory)),
      history_(&history),
      unseen_(std::move(unseen)),
      initialised_(unseen_.size(), 0),
      two_hop_(two_hop),
      mails_(memory_.num_nodes(), 0) {
  std::sort(unseen_.begin(), unseen_.end());
  unseen_.erase(std::unique(unseen_.begin(), unseen_.end()), unseen_.end());
  initialised_.assign(unseen_.size(), 0);
}

double EmbeddingScorer::score(NodeId src, NodeId dst, Timestamp t) const {
  return tempograph::score(memory_, src, dst, time_since_last(*history_, src, t));
}

bool EmbeddingScorer::is_pending(NodeId u) const {
  const auto it = std::lower_bound(unseen_.begin(), unseen_.end(), u);
  return it != unseen_.end() && *it == u && !initialised_[static_cast<std::size_t>(it - unseen_.begin())];
}

void EmbeddingScorer::observe(std::span<const Event> batch) {
  if (unseen_.empty()) return;
  for (const Event& e : batch) {
    const NodeId ends[2] = {e.src, e.dst};
    for (int side = 0; side < 2; ++side) {
      const NodeId u = ends[side];
      const NodeId v = ends[1 - side];
      if (!is_pending(u) || u == v) continue;
      NodeId source = v;
      if (two_hop_) {
        const auto slice = neighborhood(*history_, v, e.t);
        source = kPaddingNode;
        for (std::int64_t i = slice.hi - 1; i >= slice.lo; --i) {
          const NodeId w = history_->nbr_dst()[static_cast<std::size_t>(i)];
          if (w != u) {
            source = w;
            break;
          }
        }
        if (source == kPaddingNode) continue;
      }
      mails_.push_mail(u, memory_.table.row(source).transpose());
    }
  }
  for (std::size_t i = 0; i < unseen_.size(); ++i) {
    if (initialised_[i]) continue;
    if (auto init = init_inductive_memory(mails_, unseen_[i])) {
      memory_.table.row(unseen_[i]) = init->transpose();
      initialised_[i] = 1;
    }
  }
}

std::int64_t EmbeddingScorer::initialised_count() const {
  return std::count(initialised_.begin(), initialised_.end(), std::uint8_t{1});
}

LinkPredictionResult evaluate_link_prediction(LinkScorer& scorer, std::span<const Event> events,
                                              const NegativePool& pool, std::int64_t ratio, std::uint64_t seed,
                                              std::int64_t batch_size) {
  if (events.empty()) throw Error(ErrorCode::EmptySplit, kModule, "no events to evaluate");
  LinkPredictionResult result;
  result.rows.reserve(events.size() * static_cast<std::size_t>(ratio + 1));
  result.rankings.reserve(events.size());
  const BatchPlan plan = plan_batches(static_cast<std::int64_t>(events.size()), batch_size);
  for (std::int64_t b = 0; b < plan.num_batches(); ++b) {
    const auto batch = events.subspan(static_cast<std::size_t>(plan.begin(b)), static_cast<std::size_t>(plan.size(b)));
    for (const Event& e : batch) {
      RankingBatch ranking;
      ranking.positive = scorer.score(e.src, e.dst, e.t);
      result.rows.push_back({e.edge_id, true, ranking.positive});
      for (NodeId neg : sample_negatives(e, pool, ratio, seed)) {
        const double s = scorer.score(e.src, neg, e.t);
        ranking.negatives.push_back(s);
        result.rows.push_back({e.edge_id, false, s});
      }
      result.rankings.push_back(std::move(ranking));
    }
    scorer.observe(batch);
  }
  result.mrr = mrr(result.rankings);
  return result;
}

void write_scores_csv(std::ostream& out, std::span<const ScoreRow> rows) {
  out << "edge_id,is_positive,score\n";
  for (const auto& r : rows) out << r.edge_id << ',' << (r.is_positive ? 1 : 0) << ',' << format_double(r.score) << '\n';
}

std::vector<RankingBatch> read_scores_csv(std::istream& in) {
  std::vector<RankingBatch> batches;
  std::vector<std::uint8_t> has_positive;
  std::unordered_map<EdgeId, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::MalformedInput, kModule, "scores line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("edge_id", 0) == 0) continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) fail("expected edge_id,is_positive,score");
    EdgeId id = 0;
    int positive = 0;
    double value = 0.0;
    const char* s = line.data();
    if (std::from_chars(s, s + c1, id).ec != std::errc()) fail("bad edge id");
    if (std::from_chars(s + c1 + 1, s + c2, positive).ec != std::errc() || (positive != 0 && positive != 1)) {
      fail("is_positive must be 0 or 1");
    }
    const auto res = std::from_chars(s + c2 + 1, s + line.size(), value);
    if (res.ec != std::errc() || res.ptr != s + line.size()) fail("bad score");

    auto [it, inserted] = index.try_emplace(id, batches.size());
    if (inserted) {
      batches.emplace_back();
      has_positive.push_back(0);
    }
    auto& batch = batches[it->second];
    if (positive) {
      if (has_positive[it->second]) fail("edge " + std::to_string(id) + " has two positives");
      has_positive[it->second] = 1;
      batch.positive = value;
    } else {
      batch.negatives.push_back(value);
    }
  }
  for (std::size_t i = 0; i < batches.size(); ++i) {
    if (!has_positive[i]) throw Error(ErrorCode::MalformedInput, kModule, "an edge group has no positive row");
  }
  return batches;
}

}  // namespace tempograph
