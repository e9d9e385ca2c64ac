#include "depsum/error.hpp"

namespace depsum {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::UnknownSpeaker: return "UnknownSpeaker";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidN: return "InvalidN";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::MissingVector: return "MissingVector";
    case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::TermAbsent: return "TermAbsent";
    case ErrorCode::DegenerateCorpus: return "DegenerateCorpus";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ArgumentError: return "ArgumentError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

}  // namespace depsum
