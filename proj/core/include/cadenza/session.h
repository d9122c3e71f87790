/// @file
/// @brief The interactive composition loop as a state machine over a Piece:
/// upload, process, continue, end, edit, explain and export.
///
/// A Session is a plain value. It records the uploaded bytes and every
/// mutating operation, so the current state can be rebuilt by replay. Callers
/// that share a Session between threads must serialize access themselves.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cadenza/corpus.h"
#include "cadenza/explainer.h"
#include "cadenza/generator.h"

namespace cadenza {

enum class SessionState { kEmpty, kUploaded, kAnalyzed, kExtended, kEnded };

std::string_view SessionStateName(SessionState state);
SessionState ParseSessionState(std::string_view text);

enum class Operation {
  kUpload,
  kProcess,
  kContinue,
  kEnd,
  kEdit,
  kReadScore,
  kExplain,
  kAlternatives,
  kExport,
};

inline constexpr std::array<Operation, 9> kAllOperations = {
    Operation::kUpload,  Operation::kProcess,      Operation::kContinue,
    Operation::kEnd,     Operation::kEdit,         Operation::kReadScore,
    Operation::kExplain, Operation::kAlternatives, Operation::kExport,
};

std::string_view OperationName(Operation op);

/// The legal-transition matrix. Upload is allowed again before processing
/// (it replaces the file); everything after Ended is read-only.
bool IsLegal(SessionState state, Operation op);

enum class UploadKind { kWav, kMidi };

std::string_view UploadKindName(UploadKind kind);
UploadKind ParseUploadKind(std::string_view text);

struct EditRecord {
  int measure = 0;
  EditField field = EditField::kDegree;
  std::string old_value;
  std::string new_value;
  std::int64_t timestamp_ms = 0;  // unix epoch

  friend bool operator==(const EditRecord&, const EditRecord&) = default;
};

std::string_view EditFieldName(EditField field);
EditField ParseEditField(std::string_view text);

/// One entry of the mutation log, in application order.
struct LoggedOp {
  enum class Kind { kContinue, kEnd, kEdit };
  Kind kind = Kind::kContinue;
  std::optional<EditRecord> edit;

  friend bool operator==(const LoggedOp&, const LoggedOp&) = default;
};

std::string_view LoggedOpName(LoggedOp::Kind kind);

struct Alternatives {
  std::vector<DegreeSymbol> degrees;
  std::vector<int> rhythms;
};

class Session {
 public:
  /// `db` must outlive the session. Validates `config`.
  Session(std::string id, GenerationConfig config, const CorpusDb& db, std::int64_t created_ms = 0);

  const std::string& id() const { return id_; }
  SessionState state() const { return state_; }
  const GenerationConfig& config() const { return config_; }
  const CorpusDb& db() const { return *db_; }
  std::int64_t created_ms() const { return created_ms_; }
  std::int64_t updated_ms() const { return updated_ms_; }

  /// Stores the bytes; decoding happens in Process. Throws kIllegalState.
  void Upload(UploadKind kind, std::vector<std::uint8_t> bytes, std::int64_t now_ms = 0);

  /// Capture (WAV) or monophonic SMF import, then analysis. On failure the
  /// session stays Uploaded. Throws kIllegalState, kPolyphonicInput,
  /// kNoNotesDetected, kMalformedRiff, kUnsupportedEncoding, kMalformedHeader...
  void Process(int bpm, std::int64_t now_ms = 0);

  const Phrase& Continue(std::int64_t now_ms = 0);
  void End(std::int64_t now_ms = 0);
  /// Throws kIllegalState, kScopeOutOfRange, kForbidden, kNotOffered.
  const EditRecord& Edit(int measure, EditField field, const std::string& value, std::int64_t now_ms = 0);

  Alternatives GetAlternatives(int measure) const;
  ExplanationDoc Explain(Scope scope, Level level) const;
  std::vector<std::uint8_t> ExportMidi() const;

  /// Throws kIllegalState before Process.
  const Piece& piece() const;
  const Score& input_score() const { return input_score_; }
  bool key_ambiguous() const;

  std::optional<UploadKind> upload_kind() const { return upload_kind_; }
  const std::vector<std::uint8_t>& upload_bytes() const { return upload_bytes_; }
  std::optional<int> bpm() const { return bpm_; }
  const std::vector<LoggedOp>& log() const { return log_; }
  std::vector<EditRecord> edit_log() const;

  /// Rebuilds a session from its recorded inputs. Timestamps are restored
  /// as logged.
  static Session Replay(std::string id, GenerationConfig config, const CorpusDb& db,
                        std::int64_t created_ms, std::optional<UploadKind> kind,
                        std::vector<std::uint8_t> bytes, std::optional<int> bpm,
                        const std::vector<LoggedOp>& log, std::int64_t updated_ms);

 private:
  void Require(Operation op) const;
  void Touch(std::int64_t now_ms);

  std::string id_;
  GenerationConfig config_;
  const CorpusDb* db_;
  SessionState state_ = SessionState::kEmpty;
  std::int64_t created_ms_ = 0;
  std::int64_t updated_ms_ = 0;

  std::optional<UploadKind> upload_kind_;
  std::vector<std::uint8_t> upload_bytes_;
  std::optional<int> bpm_;
  Score input_score_;
  std::optional<Piece> piece_;
  std::vector<LoggedOp> log_;
};

/// Score of an uploaded file without a session: capture for WAV, monophonic
/// import for MIDI. Throws the same errors as Session::Process.
Score DecodeInput(UploadKind kind, std::span<const std::uint8_t> bytes, int bpm);

/// Upload kind from a file name or media type; throws kUnsupportedMediaType
/// for mp3 and anything else.
UploadKind DetectUploadKind(std::string_view filename, std::string_view content_type,
                            std::span<const std::uint8_t> bytes);

}  // namespace cadenza
