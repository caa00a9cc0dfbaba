#include "tempograph/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_map>

namespace tempograph {

namespace {

constexpr const char* kModule = "ingest";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_row(std::string_view line, char delim) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      cols.push_back(trim(line.substr(start)));
      break;
    }
    cols.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cols;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), last, v);
  if (ec != std::errc() || ptr != last || s.empty()) return std::nullopt;
  return v;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::MalformedInput, kModule,
              "line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, ptr};
}

IngestResult parse_events_csv(std::istream& in, const CsvSchema& schema) {
  if (schema.src_col < 0 || schema.dst_col < 0 || schema.t_col < 0) {
    throw Error(ErrorCode::InvalidArgument, kModule, "column indices must be non-negative");
  }
  const int required = std::max({schema.src_col, schema.dst_col, schema.t_col}) + 1;

  IngestResult result;
  std::unordered_map<std::string, NodeId> remap;
  std::vector<Event> events;
  std::vector<std::vector<double>> features;
  std::optional<std::size_t> width;
  NodeId max_id = -1;

  auto node_of = [&](std::string_view tok, std::size_t line_no) -> NodeId {
    if (schema.remap_ids) {
      auto [it, inserted] = remap.try_emplace(std::string(tok), static_cast<NodeId>(remap.size()));
      if (inserted) result.original_ids.emplace_back(tok);
      return it->second;
    }
    auto id = parse_int(tok);
    if (!id || *id < 0) malformed(line_no, "node id '" + std::string(tok) + "' is not a non-negative integer");
    max_id = std::max(max_id, *id);
    return *id;
  };

  std::string line;
  std::size_t line_no = 0;
  bool header_pending = schema.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto cols = split_row(line, schema.delimiter);
    if (static_cast<int>(cols.size()) < required) {
      malformed(line_no, "expected at least " + std::to_string(required) + " columns, got " +
                             std::to_string(cols.size()));
    }
    if (width && cols.size() != *width) {
      malformed(line_no, "column count " + std::to_string(cols.size()) +
                             " differs from first row (" + std::to_string(*width) + ")");
    }
    width = cols.size();

    const auto t = parse_double(cols[static_cast<std::size_t>(schema.t_col)]);
    if (!t || !std::isfinite(*t)) {
      malformed(line_no, "non-numeric timestamp '" +
                             std::string(cols[static_cast<std::size_t>(schema.t_col)]) + "'");
    }
    Event e;
    e.src = node_of(cols[static_cast<std::size_t>(schema.src_col)], line_no);
    e.dst = node_of(cols[static_cast<std::size_t>(schema.dst_col)], line_no);
    e.t = *t;
    e.edge_id = static_cast<EdgeId>(events.size());
    events.push_back(e);

    if (schema.features_from_rest) {
      std::vector<double> row;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const int ci = static_cast<int>(c);
        if (ci == schema.src_col || ci == schema.dst_col || ci == schema.t_col) continue;
        auto v = parse_double(cols[c]);
        if (!v) malformed(line_no, "non-numeric feature in column " + std::to_string(c));
        row.push_back(*v);
      }
      features.push_back(std::move(row));
    }
  }

  if (schema.remap_ids) {
    result.stream.num_nodes = static_cast<std::int64_t>(remap.size());
  } else {
    result.stream.num_nodes = max_id + 1;
    if (schema.num_nodes) {
      if (*schema.num_nodes < max_id + 1) {
        throw Error(ErrorCode::NodeOutOfRange, kModule,
                    "node id " + std::to_string(max_id) + " exceeds declared node count");
      }
      result.stream.num_nodes = *schema.num_nodes;
    }
    result.original_ids.reserve(static_cast<std::size_t>(result.stream.num_nodes));
    for (NodeId i = 0; i < result.stream.num_nodes; ++i) result.original_ids.push_back(std::to_string(i));
  }

  const std::size_t d_e = features.empty() ? 0 : features.front().size();
  if (d_e > 0) {
    result.stream.edge_feat.resize(static_cast<Eigen::Index>(features.size()),
                                   static_cast<Eigen::Index>(d_e));
    for (std::size_t r = 0; r < features.size(); ++r) {
      for (std::size_t c = 0; c < d_e; ++c) {
        result.stream.edge_feat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            features[r][c];
      }
    }
  }
  sort_chronologically(events);
  result.stream.events = std::move(events);
  return result;
}

IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, kModule, "cannot open " + path.string());
  return parse_events_csv(in, schema);
}

void write_events_csv(std::ostream& out, const EventStream& stream) {
  const auto d_e = stream.edge_feat.cols();
  out << "src,dst,t";
  for (Eigen::Index c = 0; c < d_e; ++c) out << ",f" << (c + 1);
  out << '\n';
  for (const Event& e : stream.events) {
    out << e.src << ',' << e.dst << ',' << format_double(e.t);
    for (Eigen::Index c = 0; c < d_e; ++c) {
      out << ',' << format_double(stream.edge_feat(static_cast<Eigen::Index>(e.edge_id), c));
    }
    out << '\n';
  }
}

void write_events_csv(const std::filesystem::path& path, const EventStream& stream) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, kModule, "cannot write " + path.string());
  write_events_csv(out, stream);
}

void write_remap_csv(std::ostream& out, const std::vector<std::string>& original_ids) {
  out << "node_id,original_id\n";
  for (std::size_t i = 0; i < original_ids.size(); ++i) out << i << ',' << original_ids[i] << '\n';
}

}  // namespace tempograph
