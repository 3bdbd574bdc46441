#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace s2p {

enum class ErrorCode {
  Range,
  InvalidArgument,
  BackendUnavailable,
  DimMismatch,
  EmptyEpisode,
  Io,
  CorruptManifest,
  CorruptSample,
  MissingFrame,
  EmbedderMismatch,
  Locked,
  EmptyMemory,
  KTooLarge,
  FrameTooSmall,
  RobotOffFloor,
  NoCandidates,
  SetupMismatch,
  TemplatePlaceholder,
  NoJsonFound,
  SchemaViolation,
  UnknownLabel,
  Timeout,
  HttpStatus,
  CapabilityExceeded,
  CassetteMiss,
  EmptySet,
  MissingLengths,
  NoActiveSession,
  Usage,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library carries a machine-readable code and a
// short detail (field name, offending id, path, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace s2p
