#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace depsum {

enum class ErrorCode {
  MalformedRow,
  UnknownSpeaker,
  LabelMismatch,
  DuplicateId,
  InvalidN,
  EmptyMatrix,
  ZeroNorm,
  DimMismatch,
  MalformedLine,
  DuplicateKey,
  MissingVector,
  EmptyCandidateSet,
  OutOfRange,
  TermAbsent,
  DegenerateCorpus,
  DegenerateSplit,
  ShapeMismatch,
  MalformedFile,
  FileNotFound,
  ArgumentError,
};

std::string_view to_string(ErrorCode code);

// Every module reports failures through this one exception type; callers
// that need to branch on the failure inspect code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  // what() without the leading "Code: ".
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace depsum
