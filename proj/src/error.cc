#include "gso/error.h"

namespace gso {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidPos: return "InvalidPos";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kDiscrepancyViolation: return "DiscrepancyViolation";
    case ErrorCode::kScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::kDanglingParent: return "DanglingParent";
    case ErrorCode::kCrossPosParent: return "CrossPosParent";
    case ErrorCode::kMultipleRoots: return "MultipleRoots";
    case ErrorCode::kMissingRoot: return "MissingRoot";
    case ErrorCode::kCycle: return "Cycle";
    case ErrorCode::kUnscoredRoot: return "UnscoredRoot";
    case ErrorCode::kNotANoun: return "NotANoun";
    case ErrorCode::kNotAModifier: return "NotAModifier";
    case ErrorCode::kUnknownSynset: return "UnknownSynset";
    case ErrorCode::kMissingScore: return "MissingScore";
    case ErrorCode::kUnresolvedPair: return "UnresolvedPair";
    case ErrorCode::kClassTooSmall: return "ClassTooSmall";
    case ErrorCode::kInvalidRatio: return "InvalidRatio";
    case ErrorCode::kEmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::kInvalidParameter: return "InvalidParameter";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kUnknownWorker: return "UnknownWorker";
    case ErrorCode::kUnknownTask: return "UnknownTask";
    case ErrorCode::kInvalidSequence: return "InvalidSequence";
    case ErrorCode::kNoAnnotations: return "NoAnnotations";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string &message, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " +
                                        message
                                  : message),
      code_(code),
      line_(line) {}

}  // namespace gso
