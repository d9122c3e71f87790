#include "cadenza/service/documents.h"

#include <algorithm>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <boost/crc.hpp>
#include <boost/rational.hpp>

#include "json.hpp"

namespace cadenza::service {

using nlohmann::json;

namespace {

std::string Base64Encode(const std::vector<std::uint8_t>& bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::vector<std::uint8_t>::const_iterator, 6, 8>>;
  std::string out(It(bytes.begin()), It(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

std::vector<std::uint8_t> Base64Decode(std::string text) {
  using namespace boost::archive::iterators;
  using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  std::size_t pad = 0;
  while (!text.empty() && text.back() == '=') {
    text.pop_back();
    ++pad;
  }
  if (pad > 2 || text.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/") !=
                     std::string::npos) {
    throw Error(ErrorCode::kParseError, "invalid base64 payload");
  }
  // Re-pad with 'A' (zero bits) so the decoder sees whole groups, then drop
  // the bytes the padding stood for.
  text.append(pad, 'A');
  std::vector<std::uint8_t> out(It(text.begin()), It(text.end()));
  out.resize(out.size() - pad);
  return out;
}

std::uint32_t Crc32(const std::vector<std::uint8_t>& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

double ToDouble(const Beats& b) { return boost::rational_cast<double>(b); }

json Nullable(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

json EventJson(const NoteEvent& e, const Key& key) {
  json j;
  j["kind"] = e.is_note() ? "note" : "rest";
  j["onset"] = FormatBeats(e.onset);
  j["duration"] = FormatBeats(e.duration);
  j["onset_beats"] = ToDouble(e.onset);
  j["duration_beats"] = ToDouble(e.duration);
  if (e.is_note()) {
    j["midi"] = e.pitch->midi;
    j["name"] = SpellMidi(e.pitch->midi, key);
  }
  if (e.ornament) {
    j["ornament"] = {{"kind", OrnamentName(e.ornament->kind)},
                     {"auxiliary", e.ornament->auxiliary.midi},
                     {"auxiliary_name", SpellMidi(e.ornament->auxiliary.midi, key)}};
  }
  return j;
}

json MeasureObject(const Piece& piece, int m) {
  const Key& key = piece.analysis.key;
  const Measure& right = piece.score.parts[0].measures[static_cast<std::size_t>(m)];
  const Measure& left = piece.score.parts[1].measures[static_cast<std::size_t>(m)];
  json j;
  j["index"] = m;
  j["source"] = MeasureSourceName(right.source);
  auto phrase = piece.PhraseOf(m);
  if (m < piece.input_measures) {
    j["role"] = "input";
  } else {
    j["role"] = phrase ? "phrase" : "cadence";
  }
  j["phrase"] = phrase ? json(*phrase) : json(nullptr);
  j["chord"] = right.chord ? json(right.chord->Display()) : json(nullptr);
  std::optional<std::string> degree;
  std::optional<int> rhythm;
  if (phrase) {
    const Phrase& ph = piece.phrases[*phrase];
    auto pos = static_cast<std::size_t>(m - ph.first_measure);
    degree = ph.progression[pos].Display();
    rhythm = ph.rhythm_plan[pos];
  } else if (right.chord) {
    degree = ChordToDegree(*right.chord, key).Display();
  }
  j["degree"] = Nullable(degree);
  j["rhythm"] = rhythm ? json(*rhythm) : json(nullptr);
  j["editable"] = phrase.has_value() && !piece.ended;
  j["right"] = json::array();
  for (const auto& e : right.events) j["right"].push_back(EventJson(e, key));
  j["left"] = json::array();
  for (const auto& e : left.events) j["left"].push_back(EventJson(e, key));
  return j;
}

json DegreeList(const std::vector<DegreeSymbol>& degrees) {
  json out = json::array();
  for (const auto& d : degrees) out.push_back(d.Display());
  return out;
}

json PhraseObject(const Piece& piece, std::size_t j) {
  const Phrase& ph = piece.phrases[j];
  json chords = json::array();
  for (const auto& c : ph.chords) chords.push_back(c.Display());
  return {
      {"index", j},
      {"progression_id", ph.progression_id},
      {"similarity", FormatBeats(ph.similarity)},
      {"recommended", DegreeList(ph.recommended)},
      {"progression", DegreeList(ph.progression)},
      {"chords", chords},
      {"substituted", ph.substituted},
      {"first_measure", ph.first_measure},
      {"last_measure", ph.last_measure()},
      {"rhythm_plan", ph.rhythm_plan},
  };
}

json ConfigObject(const GenerationConfig& c) {
  return {
      {"seed", c.seed},
      {"substitution_probability", c.substitution_probability},
      {"ornament_rate", c.ornament_rate},
      {"right_hand_register", {c.right_hand_low, c.right_hand_high}},
      {"left_hand_register", {c.left_hand_low, c.left_hand_high}},
  };
}

json Parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParseError:
      return 400;
    case ErrorCode::kForbidden:
      return 403;
    case ErrorCode::kNotFound:
    case ErrorCode::kScopeOutOfRange:
      return 404;
    case ErrorCode::kIllegalState:
      return 409;
    case ErrorCode::kUnsupportedMediaType:
      return 415;
    case ErrorCode::kEmptyMelody:
    case ErrorCode::kNonDiatonicChord:
    case ErrorCode::kMalformedHeader:
    case ErrorCode::kTruncatedChunk:
    case ErrorCode::kUnmatchedNoteOn:
    case ErrorCode::kPolyphonicInput:
    case ErrorCode::kMalformedRiff:
    case ErrorCode::kUnsupportedEncoding:
    case ErrorCode::kNoNotesDetected:
    case ErrorCode::kCountMismatch:
    case ErrorCode::kDurationMismatch:
    case ErrorCode::kCorpusExhausted:
    case ErrorCode::kNotOffered:
    case ErrorCode::kSchemaVersionMismatch:
    case ErrorCode::kReplayMismatch:
      return 422;
    case ErrorCode::kMentorUnavailable:
      return 502;
    case ErrorCode::kCancelled:
    case ErrorCode::kIo:
      return 500;
  }
  return 500;
}

std::string ErrorJson(ErrorCode code, std::string_view message) {
  return json{{"error", {{"code", ErrorCodeName(code)}, {"message", message}}}}.dump();
}

std::string SessionSummaryJson(const Session& s) {
  json j;
  j["id"] = s.id();
  j["state"] = SessionStateName(s.state());
  j["created_ms"] = s.created_ms();
  j["updated_ms"] = s.updated_ms();
  j["config"] = ConfigObject(s.config());
  j["upload"] = s.upload_kind() ? json(UploadKindName(*s.upload_kind())) : json(nullptr);
  j["bpm"] = s.bpm() ? json(*s.bpm()) : json(nullptr);
  if (s.state() >= SessionState::kAnalyzed) {
    const Piece& p = s.piece();
    j["key"] = p.analysis.key.Name();
    j["key_ambiguous"] = p.analysis.ranking.ambiguous;
    j["phrases"] = p.phrases.size();
    j["measures"] = p.score.measure_count();
  } else {
    j["key"] = nullptr;
    j["key_ambiguous"] = false;
    j["phrases"] = 0;
    j["measures"] = 0;
  }
  j["edits"] = s.edit_log().size();
  return j.dump();
}

std::string AnalysisJson(const Session& s) {
  const Piece& p = s.piece();
  const MelodyAnalysis& a = p.analysis;
  json j;
  j["state"] = SessionStateName(s.state());
  j["key"] = a.key.Name();
  j["key_ambiguous"] = a.ranking.ambiguous;
  json candidates = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(3, a.ranking.candidates.size()); ++i) {
    candidates.push_back({{"key", a.ranking.candidates[i].key.Name()}, {"score", a.ranking.candidates[i].score}});
  }
  j["key_candidates"] = candidates;
  json chords = json::array();
  for (const auto& c : a.chords) chords.push_back(c ? json(c->Display()) : json(nullptr));
  j["chords"] = chords;
  j["degrees"] = DegreeList(a.degrees);
  j["fitted_rhythm"] = a.fitted_rhythm;
  j["fit_distance"] = a.fit_distance;
  j["input_measures"] = p.input_measures;
  return j.dump();
}

std::string ScoreJson(const Piece& piece) {
  json j;
  j["bpm"] = piece.score.bpm;
  j["key"] = piece.analysis.key.Name();
  j["time_signature"] = "4/4";
  j["input_measures"] = piece.input_measures;
  j["ended"] = piece.ended;
  j["phrases"] = json::array();
  for (std::size_t i = 0; i < piece.phrases.size(); ++i) j["phrases"].push_back(PhraseObject(piece, i));
  j["measures"] = json::array();
  for (int m = 0; m < static_cast<int>(piece.score.measure_count()); ++m) {
    j["measures"].push_back(MeasureObject(piece, m));
  }
  return j.dump();
}

std::string PhraseJson(const Piece& piece, std::size_t phrase) {
  json j = PhraseObject(piece, phrase);
  j["measures"] = json::array();
  const Phrase& ph = piece.phrases[phrase];
  for (int m = ph.first_measure; m <= ph.last_measure(); ++m) j["measures"].push_back(MeasureObject(piece, m));
  return j.dump();
}

std::string MeasureJson(const Piece& piece, int measure) { return MeasureObject(piece, measure).dump(); }

std::string ExplanationJson(const ExplanationDoc& doc) {
  json sections = json::array();
  for (const auto& s : doc.sections) {
    sections.push_back({{"aspect", AspectName(s.aspect)}, {"text", s.text}, {"plain", RenderPlain(s.text)}});
  }
  json terms = json::array();
  for (const auto& t : doc.terms) {
    const GlossaryEntry* e = FindTerm(t);
    terms.push_back({{"id", t}, {"definition", e ? e->definition : ""}});
  }
  return json{{"scope", doc.scope.ToString()}, {"level", LevelName(doc.level)}, {"sections", sections}, {"terms", terms}}
      .dump();
}

std::string AlternativesJson(int measure, const Alternatives& alternatives, const CorpusDb& db) {
  json rhythms = json::array();
  for (int id : alternatives.rhythms) rhythms.push_back({{"id", id}, {"style", db.Rhythm(id).style}});
  return json{{"measure", measure}, {"degrees", DegreeList(alternatives.degrees)}, {"rhythms", rhythms}}.dump();
}

std::string EditResultJson(const Piece& piece, const EditRecord& r) {
  json j;
  j["measure"] = MeasureObject(piece, r.measure);
  j["edit"] = {{"measure", r.measure},
               {"field", EditFieldName(r.field)},
               {"old", r.old_value},
               {"new", r.new_value},
               {"timestamp_ms", r.timestamp_ms}};
  auto phrase = piece.PhraseOf(r.measure);
  j["progression"] = DegreeList(piece.phrases[*phrase].progression);
  return j.dump();
}

std::string MentorJson(const MentorExchange& exchange, std::optional<std::string_view> fallback) {
  json j{{"query", exchange.query}, {"response", exchange.response}, {"source", MentorSourceName(exchange.source)}};
  if (fallback) j["fallback_reason"] = *fallback;
  return j.dump();
}

GenerationConfig ParseConfigJson(std::string_view text, const GenerationConfig& base) {
  GenerationConfig c = base;
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  try {
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) throw Error(ErrorCode::kInvalidArgument, "seed must be a non-negative integer");
      c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("substitution_probability")) {
      c.substitution_probability = j.at("substitution_probability").get<double>();
    }
    if (j.contains("ornament_rate")) c.ornament_rate = j.at("ornament_rate").get<double>();
    if (j.contains("right_hand_register")) {
      auto r = j.at("right_hand_register").get<std::vector<int>>();
      if (r.size() != 2) throw Error(ErrorCode::kInvalidArgument, "right_hand_register needs two values");
      c.right_hand_low = r[0];
      c.right_hand_high = r[1];
    }
    if (j.contains("left_hand_register")) {
      auto r = j.at("left_hand_register").get<std::vector<int>>();
      if (r.size() != 2) throw Error(ErrorCode::kInvalidArgument, "left_hand_register needs two values");
      c.left_hand_low = r[0];
      c.left_hand_high = r[1];
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad config value: ") + e.what());
  }
  c.Validate();
  return c;
}

std::string ConfigJson(const GenerationConfig& config) { return ConfigObject(config).dump(); }

std::string SaveSessionJson(const Session& s) {
  json j;
  j["schema"] = kSessionSchema;
  j["version"] = kSessionSchemaVersion;
  j["id"] = s.id();
  j["state"] = SessionStateName(s.state());
  j["created_ms"] = s.created_ms();
  j["updated_ms"] = s.updated_ms();
  j["config"] = ConfigObject(s.config());
  j["corpus_digest"] = s.db().source_digest;
  if (s.upload_kind()) {
    j["upload"] = {{"kind", UploadKindName(*s.upload_kind())}, {"base64", Base64Encode(s.upload_bytes())}};
  } else {
    j["upload"] = nullptr;
  }
  j["bpm"] = s.bpm() ? json(*s.bpm()) : json(nullptr);
  json log = json::array();
  for (const auto& op : s.log()) {
    json entry{{"op", LoggedOpName(op.kind)}};
    if (op.edit) {
      entry["measure"] = op.edit->measure;
      entry["field"] = EditFieldName(op.edit->field);
      entry["old"] = op.edit->old_value;
      entry["new"] = op.edit->new_value;
      entry["timestamp_ms"] = op.edit->timestamp_ms;
    }
    log.push_back(entry);
  }
  j["log"] = log;
  j["export_crc32"] = s.state() >= SessionState::kAnalyzed ? json(Crc32(s.ExportMidi())) : json(nullptr);
  return j.dump(2) + "\n";
}

Session LoadSessionJson(std::string_view text, const CorpusDb& db) {
  json j = Parse(text);
  if (!j.is_object() || j.value("schema", "") != kSessionSchema) {
    throw Error(ErrorCode::kSchemaVersionMismatch, "not a session document");
  }
  if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != kSessionSchemaVersion) {
    throw Error(ErrorCode::kSchemaVersionMismatch,
                "session schema version " + (j.contains("version") ? j["version"].dump() : std::string("missing")) +
                    " is not " + std::to_string(kSessionSchemaVersion));
  }
  try {
    GenerationConfig config = ParseConfigJson(j.at("config").dump());
    std::optional<UploadKind> kind;
    std::vector<std::uint8_t> bytes;
    if (!j.at("upload").is_null()) {
      kind = ParseUploadKind(j["upload"].at("kind").get<std::string>());
      bytes = Base64Decode(j["upload"].at("base64").get<std::string>());
    }
    std::optional<int> bpm;
    if (!j.at("bpm").is_null()) bpm = j["bpm"].get<int>();
    std::vector<LoggedOp> log;
    for (const auto& entry : j.at("log")) {
      const std::string op = entry.at("op").get<std::string>();
      if (op == "continue") {
        log.push_back({LoggedOp::Kind::kContinue, std::nullopt});
      } else if (op == "end") {
        log.push_back({LoggedOp::Kind::kEnd, std::nullopt});
      } else if (op == "edit") {
        EditRecord r;
        r.measure = entry.at("measure").get<int>();
        r.field = ParseEditField(entry.at("field").get<std::string>());
        r.old_value = entry.at("old").get<std::string>();
        r.new_value = entry.at("new").get<std::string>();
        r.timestamp_ms = entry.at("timestamp_ms").get<std::int64_t>();
        log.push_back({LoggedOp::Kind::kEdit, r});
      } else {
        throw Error(ErrorCode::kParseError, "unknown log entry '" + op + "'");
      }
    }
    if (j.at("corpus_digest").get<std::uint32_t>() != db.source_digest) {
      throw Error(ErrorCode::kReplayMismatch, "the session was created with a different corpus");
    }
    Session s = Session::Replay(j.at("id").get<std::string>(), config, db, j.at("created_ms").get<std::int64_t>(),
                                kind, std::move(bytes), bpm, log, j.at("updated_ms").get<std::int64_t>());
    if (SessionStateName(s.state()) != j.at("state").get<std::string>()) {
      throw Error(ErrorCode::kReplayMismatch, "replayed state differs from the stored state");
    }
    if (!j.at("export_crc32").is_null() &&
        (s.state() < SessionState::kAnalyzed || Crc32(s.ExportMidi()) != j["export_crc32"].get<std::uint32_t>())) {
      throw Error(ErrorCode::kReplayMismatch, "replayed score differs from the stored export digest");
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed session document: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kReplayMismatch || e.code() == ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kReplayMismatch, std::string("replay failed: ") + e.what());
  }
}

}  // namespace cadenza::service
