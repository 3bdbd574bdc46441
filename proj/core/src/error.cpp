#include "s2p/error.hpp"

namespace s2p {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Range: return "RANGE";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::BackendUnavailable: return "BACKEND_UNAVAILABLE";
    case ErrorCode::DimMismatch: return "DIM_MISMATCH";
    case ErrorCode::EmptyEpisode: return "EMPTY_EPISODE";
    case ErrorCode::Io: return "IO";
    case ErrorCode::CorruptManifest: return "CORRUPT_MANIFEST";
    case ErrorCode::CorruptSample: return "CORRUPT_SAMPLE";
    case ErrorCode::MissingFrame: return "MISSING_FRAME";
    case ErrorCode::EmbedderMismatch: return "EMBEDDER_MISMATCH";
    case ErrorCode::Locked: return "LOCKED";
    case ErrorCode::EmptyMemory: return "EMPTY_MEMORY";
    case ErrorCode::KTooLarge: return "K_TOO_LARGE";
    case ErrorCode::FrameTooSmall: return "FRAME_TOO_SMALL";
    case ErrorCode::RobotOffFloor: return "ROBOT_OFF_FLOOR";
    case ErrorCode::NoCandidates: return "NO_CANDIDATES";
    case ErrorCode::SetupMismatch: return "SETUP_MISMATCH";
    case ErrorCode::TemplatePlaceholder: return "TEMPLATE_PLACEHOLDER";
    case ErrorCode::NoJsonFound: return "NO_JSON_FOUND";
    case ErrorCode::SchemaViolation: return "SCHEMA_VIOLATION";
    case ErrorCode::UnknownLabel: return "UNKNOWN_LABEL";
    case ErrorCode::Timeout: return "TIMEOUT";
    case ErrorCode::HttpStatus: return "HTTP_STATUS";
    case ErrorCode::CapabilityExceeded: return "CAPABILITY_EXCEEDED";
    case ErrorCode::CassetteMiss: return "CASSETTE_MISS";
    case ErrorCode::EmptySet: return "EMPTY_SET";
    case ErrorCode::MissingLengths: return "MISSING_LENGTHS";
    case ErrorCode::NoActiveSession: return "NO_ACTIVE_SESSION";
    case ErrorCode::Usage: return "USAGE";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : "(" + detail + ")")),
      code_(code),
      detail_(std::move(detail)) {}

}  // namespace s2p
