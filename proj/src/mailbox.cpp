#include "tempograph/mailbox.hpp"

#include <algorithm>
#include <numeric>

#include "tempograph/parallel.hpp"

namespace tempograph {

namespace {

constexpr const char* kModule = "batching_mailbox";

/// Sorts `idx` by (recipient, time, index) and keeps the last of each run.
void reduce_sorted(std::span<const NodeId> recipient, std::span<const Timestamp> time,
                   std::vector<std::int64_t>& idx, std::vector<std::int64_t>& winners) {
  std::sort(idx.begin(), idx.end(), [&](std::int64_t a, std::int64_t b) {
    const auto ua = recipient[static_cast<std::size_t>(a)];
    const auto ub = recipient[static_cast<std::size_t>(b)];
    if (ua != ub) return ua < ub;
    const auto ta = time[static_cast<std::size_t>(a)];
    const auto tb = time[static_cast<std::size_t>(b)];
    if (ta != tb) return ta < tb;
    return a < b;
  });
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const bool segment_end = i + 1 == idx.size() ||
                             recipient[static_cast<std::size_t>(idx[i])] !=
                                 recipient[static_cast<std::size_t>(idx[i + 1])];
    if (segment_end) winners.push_back(idx[i]);
  }
}

}  // namespace

BatchPlan plan_batches(std::int64_t num_events, std::int64_t bs) {
  if (bs < 1) throw Error(ErrorCode::InvalidArgument, kModule, "batch size must be >= 1");
  if (num_events < 0) throw Error(ErrorCode::InvalidArgument, kModule, "negative event count");
  BatchPlan plan;
  for (std::int64_t b = 0; b < num_events; b += bs) plan.boundaries.push_back(b);
  plan.boundaries.push_back(num_events);
  return plan;
}

MessageBatch build_messages(std::span<const Event> batch, const Eigen::Ref<const Eigen::MatrixXd>& memory,
                            std::span<const Timestamp> last_update, const TimeEncoder<double>& encoder,
                            const Eigen::Ref<const Eigen::MatrixXd>& edge_feat, std::int64_t d_e,
                            unsigned workers) {
  const Eigen::Index d_mem = memory.cols();
  const Eigen::Index d_t = encoder.dim();
  const Eigen::Index width = 2 * d_mem + d_t + d_e;
  const auto n = static_cast<std::int64_t>(batch.size());

  for (const Event& e : batch) {
    if (e.src < 0 || e.dst < 0 || e.src >= memory.rows() || e.dst >= memory.rows() ||
        static_cast<std::size_t>(std::max(e.src, e.dst)) >= last_update.size()) {
      throw Error(ErrorCode::NodeOutOfRange, kModule, "event endpoint has no memory row");
    }
    if (d_e > 0 && (edge_feat.cols() != d_e || e.edge_id >= edge_feat.rows())) {
      throw Error(ErrorCode::MissingFeature, kModule,
                  "missing edge feature for edge " + std::to_string(e.edge_id));
    }
    for (NodeId u : {e.src, e.dst}) {
      if (e.t < last_update[static_cast<std::size_t>(u)]) {
        throw Error(ErrorCode::OutOfOrder, kModule,
                    "event at t=" + std::to_string(e.t) + " precedes last update of node " +
                        std::to_string(u));
      }
    }
  }

  MessageBatch out;
  out.recipient.resize(static_cast<std::size_t>(2 * n));
  out.time.resize(static_cast<std::size_t>(2 * n));
  out.payload.resize(2 * n, width);
  parallel_chunks(n, workers, [&](std::int64_t begin, std::int64_t end, std::int64_t) {
    for (std::int64_t i = begin; i < end; ++i) {
      const Event& e = batch[static_cast<std::size_t>(i)];
      const NodeId ends[2] = {e.src, e.dst};
      for (int side = 0; side < 2; ++side) {
        const NodeId self = ends[side];
        const NodeId other = ends[1 - side];
        const Eigen::Index r = 2 * i + side;
        auto row = out.payload.row(r);
        row.segment(0, d_mem) = memory.row(self);
        row.segment(d_mem, d_mem) = memory.row(other);
        const double dt = e.t - last_update[static_cast<std::size_t>(self)];
        row.segment(2 * d_mem, d_t) = encoder(dt).transpose();
        if (d_e > 0) row.segment(2 * d_mem + d_t, d_e) = edge_feat.row(e.edge_id);
        out.recipient[static_cast<std::size_t>(r)] = self;
        out.time[static_cast<std::size_t>(r)] = e.t;
      }
    }
  });
  return out;
}

LastMessages reduce_last_per_node(std::span<const NodeId> recipient, std::span<const Timestamp> time,
                                  unsigned workers) {
  if (recipient.size() != time.size()) {
    throw Error(ErrorCode::InvalidArgument, kModule, "recipient/time length mismatch");
  }
  const auto n = static_cast<std::int64_t>(recipient.size());
  if (workers == 0) workers = default_workers();
  const auto chunks = static_cast<std::size_t>(std::max<std::int64_t>(1, std::min<std::int64_t>(workers, n)));
  std::vector<std::vector<std::int64_t>> partial(chunks);
  parallel_chunks(n, workers, [&](std::int64_t begin, std::int64_t end, std::int64_t c) {
    std::vector<std::int64_t> idx(static_cast<std::size_t>(end - begin));
    std::iota(idx.begin(), idx.end(), begin);
    reduce_sorted(recipient, time, idx, partial[static_cast<std::size_t>(c)]);
  });

  std::vector<std::int64_t> winners;
  if (partial.size() == 1) {
    winners = std::move(partial.front());
  } else {
    std::vector<std::int64_t> merged;
    for (auto& p : partial) merged.insert(merged.end(), p.begin(), p.end());
    reduce_sorted(recipient, time, merged, winners);
  }

  LastMessages out;
  out.nodes.reserve(winners.size());
  for (std::int64_t w : winners) out.nodes.push_back(recipient[static_cast<std::size_t>(w)]);
  out.message = std::move(winners);
  return out;
}

LastMessages reduce_last_linear_probe(std::span<const NodeId> recipient,
                                      std::span<const Timestamp> time) {
  std::vector<NodeId> distinct;
  for (NodeId u : recipient) {
    if (std::find(distinct.begin(), distinct.end(), u) == distinct.end()) distinct.push_back(u);
  }
  std::sort(distinct.begin(), distinct.end());
  LastMessages out;
  for (NodeId u : distinct) {
    std::int64_t best = -1;
    for (std::size_t i = 0; i < recipient.size(); ++i) {
      if (recipient[i] != u) continue;
      if (best < 0 || time[i] >= time[static_cast<std::size_t>(best)]) best = static_cast<std::int64_t>(i);
    }
    out.nodes.push_back(u);
    out.message.push_back(best);
  }
  return out;
}

Mailbox::Mailbox(std::int64_t num_nodes, Eigen::Index message_dim)
    : message_(Eigen::MatrixXd::Zero(num_nodes, message_dim)),
      message_time_(static_cast<std::size_t>(num_nodes), 0.0),
      has_message_(static_cast<std::size_t>(num_nodes), 0),
      last_update_(static_cast<std::size_t>(num_nodes), 0.0),
      mails_(static_cast<std::size_t>(num_nodes)) {}

MailboxSnapshot Mailbox::read(std::span<const NodeId> nodes) const {
  MailboxSnapshot s;
  s.nodes.assign(nodes.begin(), nodes.end());
  s.message.resize(static_cast<Eigen::Index>(nodes.size()), message_.cols());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const NodeId u = nodes[i];
    if (u < 0 || u >= num_nodes()) throw Error(ErrorCode::NodeOutOfRange, kModule, "mailbox read out of range");
    s.message.row(static_cast<Eigen::Index>(i)) = message_.row(u);
    s.message_time.push_back(message_time_[static_cast<std::size_t>(u)]);
    s.has_message.push_back(has_message_[static_cast<std::size_t>(u)]);
    s.last_update.push_back(last_update_[static_cast<std::size_t>(u)]);
  }
  return s;
}

void Mailbox::deliver(const MessageBatch& batch, unsigned workers) {
  if (batch.size() == 0) return;
  if (batch.payload.cols() != message_.cols()) {
    throw Error(ErrorCode::FeatureDimension, kModule, "message width does not match mailbox");
  }
  const Timestamp earliest = *std::min_element(batch.time.begin(), batch.time.end());
  if (any_delivered_ && earliest < watermark_) {
    throw Error(ErrorCode::OutOfOrder, kModule,
                "batch contains a message at t=" + std::to_string(earliest) +
                    " before committed watermark " + std::to_string(watermark_));
  }
  for (NodeId u : batch.recipient) {
    if (u < 0 || u >= num_nodes()) throw Error(ErrorCode::NodeOutOfRange, kModule, "message recipient out of range");
  }
  const LastMessages last = reduce_last_per_node(batch.recipient, batch.time, workers);
  for (std::size_t i = 0; i < last.nodes.size(); ++i) {
    const NodeId u = last.nodes[i];
    const auto m = last.message[i];
    const auto ui = static_cast<std::size_t>(u);
    message_.row(u) = batch.payload.row(m);
    message_time_[ui] = batch.time[static_cast<std::size_t>(m)];
    has_message_[ui] = 1;
    last_update_[ui] = message_time_[ui];
  }
  watermark_ = std::max(watermark_, *std::max_element(batch.time.begin(), batch.time.end()));
  any_delivered_ = true;
}

void Mailbox::push_mail(NodeId u, const Eigen::Ref<const Eigen::VectorXd>& mail) {
  auto& queue = mails_.at(static_cast<std::size_t>(u));
  if (static_cast<std::int64_t>(queue.size()) >= kQueueCapacity) return;
  queue.emplace_back(mail);
}

std::int64_t Mailbox::mail_count(NodeId u) const {
  return static_cast<std::int64_t>(mails_.at(static_cast<std::size_t>(u)).size());
}

Eigen::VectorXd Mailbox::mail(NodeId u, std::int64_t i) const {
  return mails_.at(static_cast<std::size_t>(u)).at(static_cast<std::size_t>(i));
}

std::vector<NodeId> touched_nodes(std::span<const Event> batch) {
  std::vector<NodeId> nodes;
  nodes.reserve(batch.size() * 2);
  for (const Event& e : batch) {
    nodes.push_back(e.src);
    nodes.push_back(e.dst);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

MailboxSnapshot step_mailbox(Mailbox& mailbox, std::span<const Event> batch, const MessageBatch& messages,
                             unsigned workers) {
  MailboxSnapshot snapshot = mailbox.read(touched_nodes(batch));
  mailbox.deliver(messages, workers);
  return snapshot;
}

}  // namespace tempograph
