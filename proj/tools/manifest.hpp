#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace tempograph::cli {

/// Hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

/// Record of one invocation, written next to its primary output.
struct RunManifest {
  std::string subcommand;
  /// Every option of the subcommand with its resolved value.
  std::map<std::string, std::string> flags;
  std::optional<std::uint64_t> seed;
  bool seed_auto_drawn = false;
  std::map<std::string, std::string> input_sha256;
  std::vector<std::string> outputs;
  double duration_seconds = 0.0;

  void add_input(const std::filesystem::path& path) { input_sha256[path.string()] = sha256_file(path); }
  nlohmann::json to_json() const;
};

/// Collects output files in memory and writes them together, so a failing
/// run leaves no partial artifacts behind.
class OutputSet {
 public:
  void add(const std::filesystem::path& path, std::string content);
  std::vector<std::string> paths() const;
  /// Writes every file through a temporary sibling and renames it into
  /// place. On failure all temporaries are removed and Error(Io) is thrown.
  void commit() const;

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

}  // namespace tempograph::cli
