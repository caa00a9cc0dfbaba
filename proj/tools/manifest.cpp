#include "manifest.hpp"

#include <array>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "tempograph/common.hpp"

namespace tempograph::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cli", "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "cli", "SHA-256 unavailable");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[md[i] >> 4]);
    hex.push_back(kHex[md[i] & 0xf]);
  }
  return hex;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["flags"] = flags;
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  j["seed_auto_drawn"] = seed_auto_drawn;
  j["inputs"] = input_sha256;
  j["outputs"] = outputs;
  j["duration_seconds"] = duration_seconds;
  j["version"] = TEMPOGRAPH_VERSION;
  return j;
}

void OutputSet::add(const std::filesystem::path& path, std::string content) {
  files_.emplace_back(path, std::move(content));
}

std::vector<std::string> OutputSet::paths() const {
  std::vector<std::string> p;
  for (const auto& f : files_) p.push_back(f.first.string());
  return p;
}

void OutputSet::commit() const {
  std::vector<std::filesystem::path> temps;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temps) std::filesystem::remove(t, ec);
  };
  for (const auto& [path, content] : files_) {
    auto tmp = path;
    tmp += ".partial";
    std::ofstream out(tmp, std::ios::binary);
    if (out) temps.push_back(tmp);
    if (!out || !out.write(content.data(), static_cast<std::streamsize>(content.size())) || !out.flush()) {
      cleanup();
      throw Error(ErrorCode::Io, "cli", "cannot write " + path.string());
    }
  }
  for (std::size_t i = 0; i < files_.size(); ++i) {
    std::error_code ec;
    std::filesystem::rename(temps[i], files_[i].first, ec);
    if (ec) {
      cleanup();
      throw Error(ErrorCode::Io, "cli", "cannot move output into place: " + files_[i].first.string());
    }
  }
}

}  // namespace tempograph::cli
