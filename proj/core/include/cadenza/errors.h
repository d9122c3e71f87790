/// @file
/// @brief Error type shared by every engine module.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cadenza {

enum class ErrorCode {
  // score-core
  kEmptyMelody,
  kNonDiatonicChord,
  kParseError,
  // midi-io
  kMalformedHeader,
  kTruncatedChunk,
  kUnmatchedNoteOn,
  kPolyphonicInput,
  // pitch-capture
  kMalformedRiff,
  kUnsupportedEncoding,
  kNoNotesDetected,
  kCancelled,
  // corpus
  kCountMismatch,
  kDurationMismatch,
  // generator
  kCorpusExhausted,
  // explainer
  kScopeOutOfRange,
  kMentorUnavailable,
  kInvalidArgument,
  // session
  kIllegalState,
  kNotFound,
  kForbidden,
  kNotOffered,
  kUnsupportedMediaType,
  kSchemaVersionMismatch,
  kReplayMismatch,
  kIo,
};

/// Stable identifier used in API payloads and CLI messages, e.g. "PolyphonicInput".
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cadenza
