#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "tempograph/embedding_memory.hpp"

namespace tempograph {

enum class ModelKind : std::uint32_t { Embedding = 0, Recency = 1 };

/// Contents of a model file.
///
/// Layout (little-endian):
///   char[4]  magic "TGMB"
///   u32      version (1)
///   u32      kind (0 = embedding table, 1 = recency heuristic)
///   u32      reserved (0)
///   u64      |V|, D_mem, d_T
///   f64      alpha_enc, beta_enc, lambda
///   f64      table[|V| * D_mem] (row-major), then w_t[d_T]
/// The recency heuristic stores D_mem = d_T = 0.
struct ModelFile {
  ModelKind kind = ModelKind::Embedding;
  std::int64_t num_nodes = 0;
  double lambda = 0.0;
  EmbeddingMemory memory;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(std::ostream& out, const ModelFile& model);
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(std::istream& in);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace tempograph
