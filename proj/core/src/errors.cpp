#include "cadenza/errors.h"

namespace cadenza {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyMelody: return "EmptyMelody";
    case ErrorCode::kNonDiatonicChord: return "NonDiatonicChord";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kTruncatedChunk: return "TruncatedChunk";
    case ErrorCode::kUnmatchedNoteOn: return "UnmatchedNoteOn";
    case ErrorCode::kPolyphonicInput: return "PolyphonicInput";
    case ErrorCode::kMalformedRiff: return "MalformedRiff";
    case ErrorCode::kUnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::kNoNotesDetected: return "NoNotesDetected";
    case ErrorCode::kCancelled: return "Cancelled";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kDurationMismatch: return "DurationMismatch";
    case ErrorCode::kCorpusExhausted: return "CorpusExhausted";
    case ErrorCode::kScopeOutOfRange: return "ScopeOutOfRange";
    case ErrorCode::kMentorUnavailable: return "MentorUnavailable";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIllegalState: return "IllegalState";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kForbidden: return "Forbidden";
    case ErrorCode::kNotOffered: return "NotOffered";
    case ErrorCode::kUnsupportedMediaType: return "UnsupportedMediaType";
    case ErrorCode::kSchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::kReplayMismatch: return "ReplayMismatch";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace cadenza
