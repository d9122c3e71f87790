#include "cadenza/session.h"

#include <algorithm>
#include <cctype>

#include "cadenza/capture.h"
#include "cadenza/errors.h"
#include "cadenza/midi.h"

namespace cadenza {

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

constexpr int kMinBpm = 20;
constexpr int kMaxBpm = 300;

}  // namespace

std::string_view SessionStateName(SessionState state) {
  switch (state) {
    case SessionState::kEmpty: return "Empty";
    case SessionState::kUploaded: return "Uploaded";
    case SessionState::kAnalyzed: return "Analyzed";
    case SessionState::kExtended: return "Extended";
    case SessionState::kEnded: return "Ended";
  }
  return "";
}

SessionState ParseSessionState(std::string_view text) {
  for (auto s : {SessionState::kEmpty, SessionState::kUploaded, SessionState::kAnalyzed, SessionState::kExtended,
                 SessionState::kEnded}) {
    if (SessionStateName(s) == text) return s;
  }
  throw Error(ErrorCode::kParseError, "unknown session state '" + std::string(text) + "'");
}

std::string_view OperationName(Operation op) {
  switch (op) {
    case Operation::kUpload: return "upload";
    case Operation::kProcess: return "process";
    case Operation::kContinue: return "continue";
    case Operation::kEnd: return "end";
    case Operation::kEdit: return "edit";
    case Operation::kReadScore: return "score";
    case Operation::kExplain: return "explanation";
    case Operation::kAlternatives: return "alternatives";
    case Operation::kExport: return "export";
  }
  return "";
}

bool IsLegal(SessionState state, Operation op) {
  switch (op) {
    case Operation::kUpload:
      return state == SessionState::kEmpty || state == SessionState::kUploaded;
    case Operation::kProcess:
      return state == SessionState::kUploaded;
    case Operation::kContinue:
    case Operation::kEnd:
      return state == SessionState::kAnalyzed || state == SessionState::kExtended;
    case Operation::kEdit:
      return state == SessionState::kExtended;
    case Operation::kReadScore:
    case Operation::kExplain:
    case Operation::kAlternatives:
    case Operation::kExport:
      return state == SessionState::kAnalyzed || state == SessionState::kExtended ||
             state == SessionState::kEnded;
  }
  return false;
}

std::string_view UploadKindName(UploadKind kind) { return kind == UploadKind::kWav ? "wav" : "midi"; }

UploadKind ParseUploadKind(std::string_view text) {
  if (text == "wav") return UploadKind::kWav;
  if (text == "midi") return UploadKind::kMidi;
  throw Error(ErrorCode::kParseError, "unknown upload kind '" + std::string(text) + "'");
}

std::string_view EditFieldName(EditField field) { return field == EditField::kDegree ? "degree" : "rhythm"; }

EditField ParseEditField(std::string_view text) {
  if (text == "degree") return EditField::kDegree;
  if (text == "rhythm") return EditField::kRhythm;
  throw Error(ErrorCode::kInvalidArgument, "field must be 'degree' or 'rhythm'");
}

std::string_view LoggedOpName(LoggedOp::Kind kind) {
  switch (kind) {
    case LoggedOp::Kind::kContinue: return "continue";
    case LoggedOp::Kind::kEnd: return "end";
    case LoggedOp::Kind::kEdit: return "edit";
  }
  return "";
}

Session::Session(std::string id, GenerationConfig config, const CorpusDb& db, std::int64_t created_ms)
    : id_(std::move(id)), config_(config), db_(&db), created_ms_(created_ms), updated_ms_(created_ms) {
  config_.Validate();
}

void Session::Require(Operation op) const {
  if (!IsLegal(state_, op)) {
    throw Error(ErrorCode::kIllegalState, std::string(OperationName(op)) + " is not allowed in state " +
                                              std::string(SessionStateName(state_)));
  }
}

void Session::Touch(std::int64_t now_ms) { updated_ms_ = std::max(updated_ms_, now_ms); }

void Session::Upload(UploadKind kind, std::vector<std::uint8_t> bytes, std::int64_t now_ms) {
  Require(Operation::kUpload);
  if (bytes.empty()) throw Error(ErrorCode::kInvalidArgument, "the uploaded file is empty");
  upload_kind_ = kind;
  upload_bytes_ = std::move(bytes);
  state_ = SessionState::kUploaded;
  Touch(now_ms);
}

Score DecodeInput(UploadKind kind, std::span<const std::uint8_t> bytes, int bpm) {
  if (bpm < kMinBpm || bpm > kMaxBpm) {
    throw Error(ErrorCode::kInvalidArgument,
                "bpm must be between " + std::to_string(kMinBpm) + " and " + std::to_string(kMaxBpm));
  }
  Score score;
  if (kind == UploadKind::kWav) {
    capture::CaptureOptions options;
    options.bpm = bpm;
    score = capture::CaptureMelody(bytes, options);
  } else {
    score = midi::SmfToScore(midi::ParseSmf(bytes), {.monophonic = true});
    if (score.parts.empty() ||
        std::none_of(score.parts.front().measures.begin(), score.parts.front().measures.end(),
                     [](const Measure& m) { return m.HasSoundedNotes(); })) {
      throw Error(ErrorCode::kNoNotesDetected, "the MIDI file contains no notes");
    }
  }
  score.bpm = bpm;
  return score;
}

void Session::Process(int bpm, std::int64_t now_ms) {
  Require(Operation::kProcess);
  Score melody = DecodeInput(*upload_kind_, upload_bytes_, bpm);
  MelodyAnalysis analysis = AnalyzeMelody(melody, *db_);
  input_score_ = melody;
  piece_ = StartPiece(melody, analysis);
  bpm_ = bpm;
  state_ = SessionState::kAnalyzed;
  Touch(now_ms);
}

const Phrase& Session::Continue(std::int64_t now_ms) {
  Require(Operation::kContinue);
  const Phrase& phrase = ContinuePiece(*piece_, *db_, config_);
  log_.push_back({LoggedOp::Kind::kContinue, std::nullopt});
  state_ = SessionState::kExtended;
  Touch(now_ms);
  return phrase;
}

void Session::End(std::int64_t now_ms) {
  Require(Operation::kEnd);
  EndPiece(*piece_, config_);
  log_.push_back({LoggedOp::Kind::kEnd, std::nullopt});
  state_ = SessionState::kEnded;
  Touch(now_ms);
}

const EditRecord& Session::Edit(int measure, EditField field, const std::string& value, std::int64_t now_ms) {
  Require(Operation::kEdit);
  EditRecord record;
  record.measure = measure;
  record.field = field;
  record.new_value = value;
  record.timestamp_ms = now_ms;
  if (measure >= 0 && measure < static_cast<int>(piece_->score.measure_count())) {
    if (auto p = piece_->PhraseOf(measure)) {
      const Phrase& phrase = piece_->phrases[*p];
      auto pos = static_cast<std::size_t>(measure - phrase.first_measure);
      record.old_value = field == EditField::kDegree ? phrase.progression[pos].Display()
                                                     : std::to_string(phrase.rhythm_plan[pos]);
    }
  }
  EditMeasure(*piece_, measure, field, value, *db_, config_);
  // Store the canonical spelling so replays and logs compare equal.
  if (field == EditField::kDegree) {
    const Phrase& phrase = piece_->phrases[*piece_->PhraseOf(measure)];
    record.new_value = phrase.progression[static_cast<std::size_t>(measure - phrase.first_measure)].Display();
  } else {
    record.new_value = std::to_string(std::stoi(value));
  }
  log_.push_back({LoggedOp::Kind::kEdit, record});
  Touch(now_ms);
  return *log_.back().edit;
}

Alternatives Session::GetAlternatives(int measure) const {
  Require(Operation::kAlternatives);
  if (measure < 0 || measure >= static_cast<int>(piece_->score.measure_count())) {
    throw Error(ErrorCode::kScopeOutOfRange, "measure " + std::to_string(measure) + " does not exist");
  }
  if (!piece_->PhraseOf(measure)) {
    throw Error(ErrorCode::kForbidden, "only generated phrase measures can be edited");
  }
  Alternatives out;
  out.degrees = OfferedDegrees(piece_->analysis.key);
  for (const auto& r : db_->rhythms) out.rhythms.push_back(r.id);
  return out;
}

ExplanationDoc Session::Explain(Scope scope, Level level) const {
  Require(Operation::kExplain);
  return cadenza::Explain(*piece_, *db_, scope, level);
}

std::vector<std::uint8_t> Session::ExportMidi() const {
  Require(Operation::kExport);
  return midi::WriteSmf(midi::ScoreToSmf(piece_->score));
}

const Piece& Session::piece() const {
  if (!piece_) throw Error(ErrorCode::kIllegalState, "the session has not been processed yet");
  return *piece_;
}

bool Session::key_ambiguous() const { return piece_ && piece_->analysis.ranking.ambiguous; }

std::vector<EditRecord> Session::edit_log() const {
  std::vector<EditRecord> out;
  for (const auto& op : log_) {
    if (op.edit) out.push_back(*op.edit);
  }
  return out;
}

Session Session::Replay(std::string id, GenerationConfig config, const CorpusDb& db, std::int64_t created_ms,
                        std::optional<UploadKind> kind, std::vector<std::uint8_t> bytes, std::optional<int> bpm,
                        const std::vector<LoggedOp>& log, std::int64_t updated_ms) {
  Session s(std::move(id), config, db, created_ms);
  if (kind) {
    s.Upload(*kind, std::move(bytes), created_ms);
    if (bpm) s.Process(*bpm, created_ms);
  }
  for (const auto& op : log) {
    switch (op.kind) {
      case LoggedOp::Kind::kContinue: s.Continue(created_ms); break;
      case LoggedOp::Kind::kEnd: s.End(created_ms); break;
      case LoggedOp::Kind::kEdit:
        if (!op.edit) throw Error(ErrorCode::kParseError, "edit entry without a record");
        s.Edit(op.edit->measure, op.edit->field, op.edit->new_value, op.edit->timestamp_ms);
        break;
    }
  }
  s.updated_ms_ = updated_ms;
  return s;
}

UploadKind DetectUploadKind(std::string_view filename, std::string_view content_type,
                            std::span<const std::uint8_t> bytes) {
  const std::string name = Lower(filename);
  const std::string type = Lower(content_type);
  const bool looks_mp3 = (bytes.size() >= 3 && bytes[0] == 'I' && bytes[1] == 'D' && bytes[2] == '3') ||
                         (bytes.size() >= 2 && bytes[0] == 0xFF && (bytes[1] & 0xE0) == 0xE0);
  if (EndsWith(name, ".mp3") || type == "audio/mpeg" || type == "audio/mp3" || looks_mp3) {
    throw Error(ErrorCode::kUnsupportedMediaType, "mp3 is not supported; please upload a .wav or .mid file");
  }
  if (EndsWith(name, ".wav") || type == "audio/wav" || type == "audio/x-wav" || type == "audio/wave") {
    return UploadKind::kWav;
  }
  if (EndsWith(name, ".mid") || EndsWith(name, ".midi") || type == "audio/midi" || type == "audio/x-midi") {
    return UploadKind::kMidi;
  }
  if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "RIFF")) return UploadKind::kWav;
  if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "MThd")) return UploadKind::kMidi;
  throw Error(ErrorCode::kUnsupportedMediaType, "expected a .wav or .mid file");
}

}  // namespace cadenza
