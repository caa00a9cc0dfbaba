#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tempograph/temporal_graph.hpp"

namespace tempograph {

/// Column mapping for an edge-list CSV.
struct CsvSchema {
  int src_col = 0;
  int dst_col = 1;
  int t_col = 2;
  bool has_header = true;
  /// Map raw ids densely to 0..|V|-1 in order of first appearance. When false
  /// the ids must already be non-negative integers.
  bool remap_ids = true;
  /// Every column other than src/dst/t becomes an edge feature.
  bool features_from_rest = true;
  /// Only with remap_ids == false: node count override (>= max id + 1).
  std::optional<std::int64_t> num_nodes;
  char delimiter = ',';
};

struct IngestResult {
  /// Sorted chronologically; edge_id is the 0-based data row index.
  EventStream stream;
  /// original_ids[dense id] = raw token from the file.
  std::vector<std::string> original_ids;
};

IngestResult parse_events_csv(std::istream& in, const CsvSchema& schema = {});
IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Writes `src,dst,t[,f1..fk]` with a header row, one row per event in the
/// given order. Timestamps use the shortest round-trip representation.
void write_events_csv(std::ostream& out, const EventStream& stream);
void write_events_csv(const std::filesystem::path& path, const EventStream& stream);

/// Two-column `node_id,original_id` table.
void write_remap_csv(std::ostream& out, const std::vector<std::string>& original_ids);

/// Shortest round-trip decimal text for a double.
std::string format_double(double v);

}  // namespace tempograph
