#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tempograph {

using NodeId = std::int64_t;
using EdgeId = std::int64_t;
using Timestamp = double;

inline constexpr NodeId kPaddingNode = -1;
inline constexpr EdgeId kPaddingEdge = -1;

enum class ErrorCode {
  InvalidArgument,
  NodeOutOfRange,
  FeatureDimension,
  MalformedInput,
  DegenerateRange,
  OutOfOrder,
  MissingFeature,
  InsufficientData,
  SingleMode,
  EmptySplit,
  PoolTooSmall,
  Divergence,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Error raised by every library module. `module()` names the component that
/// rejected the input so the CLI can report it with context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& what)
      : std::runtime_error(what), code_(code), module_(std::move(module)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

}  // namespace tempograph
