#include "cmind/error.hpp"

namespace cmind {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::PathNotFound: return "PathNotFound";
    case ErrorCode::UnsupportedArchive: return "UnsupportedArchive";
    case ErrorCode::ArchiveTraversal: return "ArchiveTraversal";
    case ErrorCode::ArchiveTooLarge: return "ArchiveTooLarge";
    case ErrorCode::AmbiguousBasename: return "AmbiguousBasename";
    case ErrorCode::UnknownRoot: return "UnknownRoot";
    case ErrorCode::MalformedChain: return "MalformedChain";
    case ErrorCode::SourceNotFound: return "SourceNotFound";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::TranscriptExhausted: return "TranscriptExhausted";
    case ErrorCode::TranscriptStageMismatch: return "TranscriptStageMismatch";
    case ErrorCode::NoEntryPoints: return "NoEntryPoints";
    case ErrorCode::UnparseableChoice: return "UnparseableChoice";
    case ErrorCode::UnparseableReasoning: return "UnparseableReasoning";
    case ErrorCode::InvalidReport: return "InvalidReport";
    case ErrorCode::ArchiveRejected: return "ArchiveRejected";
    case ErrorCode::UnknownJob: return "UnknownJob";
    case ErrorCode::NotReady: return "NotReady";
    case ErrorCode::ManifestInvalid: return "ManifestInvalid";
    case ErrorCode::AddressInUse: return "AddressInUse";
    case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

} // namespace cmind
