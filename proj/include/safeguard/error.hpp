#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace safeguard {

enum class ErrorCode {
  MissingShoulders,
  DegenerateWidth,
  BackendUnavailable,
  RecordedEntryMissing,
  InvalidDistribution,
  Parse,
  Version,
  Ordering,
  DuplicateKey,
  UnknownLabel,
  IdMismatch,
  GeometryMismatch,
  Io,
  Config,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` tells callers which
/// failure class they are looking at without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace safeguard
