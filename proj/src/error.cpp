#include "dualbev/error.hpp"

namespace dualbev {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::RankOverflow: return "RankOverflow";
    case Errc::IoFailure: return "IoFailure";
    case Errc::EmptyShape: return "EmptyShape";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::InvalidCount: return "InvalidCount";
    case Errc::InvalidCamera: return "InvalidCamera";
    case Errc::InvalidGrid: return "InvalidGrid";
    case Errc::InvalidMask: return "InvalidMask";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::NoCameras: return "NoCameras";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace dualbev
