#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dualbev {

enum class Errc {
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  NonFiniteValue,
  RankOverflow,
  IoFailure,
  EmptyShape,
  InvalidRange,
  InvalidCount,
  InvalidCamera,
  InvalidGrid,
  InvalidMask,
  ShapeMismatch,
  IndexOutOfRange,
  NoCameras,
  ConfigError,
};

std::string_view to_string(Errc code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dualbev
