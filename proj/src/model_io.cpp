#include "tempograph/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace tempograph {

namespace {

constexpr const char* kModule = "model_io";
constexpr std::array<char, 4> kMagic = {'T', 'G', 'M', 'B'};

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  auto bits = std::bit_cast<U>(value);
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<char>(bits & 0xffu);
    bits >>= 8;
  }
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw Error(ErrorCode::MalformedInput, kModule, "model file is truncated");
  }
  U bits = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) bits = (bits << 8) | buf[i];
  return std::bit_cast<T>(bits);
}

}  // namespace

void save_model(std::ostream& out, const ModelFile& model) {
  const auto& mem = model.memory;
  const bool emb = model.kind == ModelKind::Embedding;
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kModelFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.kind));
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(model.num_nodes));
  put<std::uint64_t>(out, emb ? static_cast<std::uint64_t>(mem.dim()) : 0);
  put<std::uint64_t>(out, emb ? static_cast<std::uint64_t>(mem.encoder.dim()) : 0);
  put<double>(out, emb ? mem.encoder.alpha() : 0.0);
  put<double>(out, emb ? mem.encoder.beta() : 0.0);
  put<double>(out, model.lambda);
  if (emb) {
    if (mem.num_nodes() != model.num_nodes) {
      throw Error(ErrorCode::InvalidArgument, kModule, "table rows do not match node count");
    }
    for (Eigen::Index r = 0; r < mem.table.rows(); ++r) {
      for (Eigen::Index c = 0; c < mem.table.cols(); ++c) put<double>(out, mem.table(r, c));
    }
    for (Eigen::Index i = 0; i < mem.time_weight.size(); ++i) put<double>(out, mem.time_weight[i]);
  }
  if (!out) throw Error(ErrorCode::Io, kModule, "failed writing model");
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, kModule, "cannot write " + path.string());
  save_model(out, model);
}

ModelFile load_model(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(ErrorCode::MalformedInput, kModule, "not a model file (bad magic)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::MalformedInput, kModule, "unsupported model version " + std::to_string(version));
  }
  ModelFile model;
  const auto kind = get<std::uint32_t>(in);
  if (kind > 1) throw Error(ErrorCode::MalformedInput, kModule, "unknown model kind");
  model.kind = static_cast<ModelKind>(kind);
  (void)get<std::uint32_t>(in);
  model.num_nodes = static_cast<std::int64_t>(get<std::uint64_t>(in));
  const auto d_mem = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  const auto d_t = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  const double alpha = get<double>(in);
  const double beta = get<double>(in);
  model.lambda = get<double>(in);
  if (model.kind == ModelKind::Embedding) {
    if (model.num_nodes < 0 || d_mem < 1 || d_t < 0 || d_mem > (1 << 20) || model.num_nodes > (std::int64_t{1} << 40)) {
      throw Error(ErrorCode::MalformedInput, kModule, "implausible model dimensions");
    }
    auto& mem = model.memory;
    mem.encoder = TimeEncoder<double>(d_t, alpha, beta);
    mem.table.resize(model.num_nodes, d_mem);
    for (Eigen::Index r = 0; r < mem.table.rows(); ++r) {
      for (Eigen::Index c = 0; c < mem.table.cols(); ++c) mem.table(r, c) = get<double>(in);
    }
    mem.time_weight.resize(d_t);
    for (Eigen::Index i = 0; i < d_t; ++i) mem.time_weight[i] = get<double>(in);
  }
  return model;
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, kModule, "cannot open " + path.string());
  return load_model(in);
}

}  // namespace tempograph
