#ifndef GSO_ERROR_H_
#define GSO_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gso {

// Machine-readable failure kinds. The names returned by ErrorCodeName() are
// part of the external interface (CLI --json output, HTTP error bodies).
enum class ErrorCode {
  kParseError,
  kIoError,
  kInvalidPos,
  kDuplicateId,
  kDiscrepancyViolation,
  kScoreOutOfRange,
  kDanglingParent,
  kCrossPosParent,
  kMultipleRoots,
  kMissingRoot,
  kCycle,
  kUnscoredRoot,
  kNotANoun,
  kNotAModifier,
  kUnknownSynset,
  kMissingScore,
  kUnresolvedPair,
  kClassTooSmall,
  kInvalidRatio,
  kEmptyVocabulary,
  kLengthMismatch,
  kDegenerateInput,
  kSingleClass,
  kDimensionMismatch,
  kNonFiniteFeature,
  kInvalidParameter,
  kVersionMismatch,
  kEmptyMatrix,
  kUnknownWorker,
  kUnknownTask,
  kInvalidSequence,
  kNoAnnotations,
};

std::string_view ErrorCodeName(ErrorCode code);

// Domain error. `line` is 1-based when the error refers to a position in an
// input file, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message, std::size_t line = 0);

  ErrorCode code() const { return code_; }
  std::string_view code_name() const { return ErrorCodeName(code_); }
  std::size_t line() const { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace gso

#endif  // GSO_ERROR_H_
