#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ghl {

enum class ErrorCode {
  ZeroSpeed,
  InvalidConfig,
  ShapeMismatch,
  DegenerateBatch,
  StaleGraph,
  EmptyDataset,
  Diverged,
  UnfittedNormalization,
  CorruptCheckpoint,
  SchemaMismatch,
  NoOverlap,
  SparseStream,
  EmptyInput,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroSpeed: return "ZeroSpeed";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DegenerateBatch: return "DegenerateBatch";
    case ErrorCode::StaleGraph: return "StaleGraph";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::UnfittedNormalization: return "UnfittedNormalization";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::SparseStream: return "SparseStream";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::Io: return "IO";
  }
  return "Unknown";
}

/// Single exception type for the library; `code()` tells callers what failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ghl
