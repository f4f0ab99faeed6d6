#pragma once

#include <stdexcept>
#include <string>

namespace forge {

enum class ErrorCode {
    MarkOutOfRange,
    DegenerateSentence,
    DegenerateReference,
    NoValidPassage,
    InsufficientCandidates,
    EmptyInput,
    EmptyBatch,
    EmptyCandidate,
    UnknownToken,
    SchemaError,
    DuplicateDocId,
    InvalidDocId,
    WrongIndexMode,
    VersionMismatch,
    CorruptFile,
    MuMismatch,
    MissingQrels,
    ConfigMismatch,
    IoError,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::MarkOutOfRange: return "MarkOutOfRange";
        case ErrorCode::DegenerateSentence: return "DegenerateSentence";
        case ErrorCode::DegenerateReference: return "DegenerateReference";
        case ErrorCode::NoValidPassage: return "NoValidPassage";
        case ErrorCode::InsufficientCandidates: return "InsufficientCandidates";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::EmptyCandidate: return "EmptyCandidate";
        case ErrorCode::UnknownToken: return "UnknownToken";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::DuplicateDocId: return "DuplicateDocId";
        case ErrorCode::InvalidDocId: return "InvalidDocId";
        case ErrorCode::WrongIndexMode: return "WrongIndexMode";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::CorruptFile: return "CorruptFile";
        case ErrorCode::MuMismatch: return "MuMismatch";
        case ErrorCode::MissingQrels: return "MissingQrels";
        case ErrorCode::ConfigMismatch: return "ConfigMismatch";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace forge
