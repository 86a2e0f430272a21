#pragma once

#include <stdexcept>
#include <string>

namespace cmind {

enum class ErrorCode {
    PathNotFound,
    UnsupportedArchive,
    ArchiveTraversal,
    ArchiveTooLarge,
    AmbiguousBasename,
    UnknownRoot,
    MalformedChain,
    SourceNotFound,
    ConfigInvalid,
    TransportError,
    TranscriptExhausted,
    TranscriptStageMismatch,
    NoEntryPoints,
    UnparseableChoice,
    UnparseableReasoning,
    InvalidReport,
    ArchiveRejected,
    UnknownJob,
    NotReady,
    ManifestInvalid,
    AddressInUse,
    IoError,
};

const char* error_code_name(ErrorCode code);

/// Error type used across all modules; carries a stable code so callers can
/// map failures to exit codes, HTTP statuses, or failure_reason strings.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace cmind
