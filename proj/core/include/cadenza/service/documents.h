/// @file
/// @brief JSON documents exchanged over /api/v1 and written to the session
/// store. Every function returns or accepts serialized JSON text so callers
/// do not depend on a particular JSON library.
///
/// Exact durations and onsets are written as rational strings ("1/3"); a
/// floating-point copy is added under a *_beats key for display code.

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "cadenza/errors.h"
#include "cadenza/explainer.h"
#include "cadenza/session.h"

namespace cadenza::service {

inline constexpr std::string_view kSessionSchema = "cadenza.session";
inline constexpr int kSessionSchemaVersion = 1;

/// HTTP status for an engine error: 400, 403, 404, 409, 415, 422, 502 or 500.
int HttpStatus(ErrorCode code);
/// {"error": {"code": "IllegalState", "message": "..."}}
std::string ErrorJson(ErrorCode code, std::string_view message);

std::string SessionSummaryJson(const Session& session);
/// Key ranking head, per-measure chords and degrees, fitted rhythm.
std::string AnalysisJson(const Session& session);
std::string ScoreJson(const Piece& piece);
std::string PhraseJson(const Piece& piece, std::size_t phrase);
std::string MeasureJson(const Piece& piece, int measure);
std::string ExplanationJson(const ExplanationDoc& doc);
std::string AlternativesJson(int measure, const Alternatives& alternatives, const CorpusDb& db);
/// The updated measure plus the edit record.
std::string EditResultJson(const Piece& piece, const EditRecord& record);
/// `fallback` names the live-mentor error that caused a stub answer.
std::string MentorJson(const MentorExchange& exchange, std::optional<std::string_view> fallback = std::nullopt);

/// Keys "seed", "substitution_probability", "ornament_rate",
/// "right_hand_register" [lo, hi] and "left_hand_register" [lo, hi], each
/// optional, merged over `base`. Throws Error(kInvalidArgument).
GenerationConfig ParseConfigJson(std::string_view text, const GenerationConfig& base = {});
std::string ConfigJson(const GenerationConfig& config);

/// Versioned persistence document (see docs/session-schema.md).
std::string SaveSessionJson(const Session& session);
/// Parses, replays and checks the stored export digest.
/// Throws kParseError, kSchemaVersionMismatch or kReplayMismatch.
Session LoadSessionJson(std::string_view text, const CorpusDb& db);

}  // namespace cadenza::service
