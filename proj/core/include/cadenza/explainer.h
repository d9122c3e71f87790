/// @file
/// @brief Level-calibrated explanations of a generated piece, the glossary
/// behind their [[term]] links, and the offline side of the theory mentor.
///
/// Facts are always written in the same phrasing so that tooling can read them
/// back: `key of D major`, `the chord Em`, `scale degree ii`,
/// `progression "I-IV-V-I"`, `chords "D-G-A-D"`, `rhythm pattern 7 (blues)`,
/// `IV (subdominant)`, `X stands in for Y`, ornament names, and note-value
/// names such as `dotted quarter note`.

#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cadenza/corpus.h"
#include "cadenza/generator.h"

namespace cadenza {

enum class Level { kBeginner, kIntermediate, kAdvanced };

std::string_view LevelName(Level level);
/// "beginner" | "intermediate" | "advanced". Throws Error(kInvalidArgument).
Level ParseLevel(std::string_view text);

enum class Aspect { kChords, kRhythm, kEmbellishment };

std::string_view AspectName(Aspect aspect);

struct Scope {
  enum class Kind { kMeasure, kPhrase, kPiece };
  Kind kind = Kind::kPiece;
  int index = 0;  // measure or phrase index (0-based); unused for the piece

  static Scope Measure(int i) { return {Kind::kMeasure, i}; }
  static Scope Phrase(int i) { return {Kind::kPhrase, i}; }
  static Scope Piece() { return {Kind::kPiece, 0}; }

  /// "measure:3", "phrase:0", "piece".
  std::string ToString() const;
  /// Inverse of ToString. Throws Error(kInvalidArgument).
  static Scope Parse(std::string_view text);

  friend bool operator==(const Scope&, const Scope&) = default;
};

struct ExplanationSection {
  Aspect aspect = Aspect::kChords;
  std::string text;  // with [[term]] links
};

struct ExplanationDoc {
  Scope scope;
  Level level = Level::kBeginner;
  std::vector<ExplanationSection> sections;  // chords, rhythm, embellishment
  std::vector<std::string> terms;            // linked glossary ids, first-use order
};

struct GlossaryEntry {
  std::string id;  // lower case, as written inside [[...]]
  std::string definition;
};

const std::vector<GlossaryEntry>& Glossary();
const GlossaryEntry* FindTerm(std::string_view id);

/// Throws Error(kScopeOutOfRange) for a measure or phrase the piece lacks.
ExplanationDoc Explain(const Piece& piece, const CorpusDb& db, Scope scope, Level level);

/// Linked ids in order of first appearance, without duplicates.
std::vector<std::string> ExtractTerms(std::string_view text);
std::vector<std::string> ExtractTerms(const ExplanationDoc& doc);

/// [[term]] -> term.
std::string RenderPlain(std::string_view text);
/// [[term]] -> *term*.
std::string RenderMarkdown(std::string_view text);

/// Markdown report: analysis summary, then the piece and every phrase at
/// `level`, each with its three aspects. Links render as *term*.
std::string RenderReport(const Piece& piece, const CorpusDb& db, Level level);

/// "quarter note", "dotted half note", "triplet eighth note", or
/// "note of 2/3 beat" for values without a common name.
std::string NoteValueName(const Beats& duration);

/// Rhythmic displacement: a note starting off the beat and held across the
/// next beat, or a rest on the downbeat while an off-beat or weak beat sounds.
bool IsSyncopated(const Measure& measure);

/// The phrase ends V(7) -> I, IV -> I, or on V.
enum class Cadence { kNone, kAuthentic, kPlagal, kHalf };
Cadence PhraseCadence(const std::vector<DegreeSymbol>& progression);
std::string_view CadenceName(Cadence cadence);

// ---------------------------------------------------------------------------
// Mentor
// ---------------------------------------------------------------------------

enum class MentorSource { kLive, kStub };

std::string_view MentorSourceName(MentorSource source);

struct MentorExchange {
  std::string query;
  std::string response;
  MentorSource source = MentorSource::kStub;
};

inline constexpr std::string_view kMentorPromptVersion = "mentor-v1";
inline constexpr std::string_view kMentorSystemPrompt =
    "You are a patient music theory mentor for people who have never studied music. "
    "Answer in at most five sentences, use one concrete example in C major or D major, "
    "and avoid notation the learner has not met.";

struct MentorConfig {
  std::string endpoint;  // empty: stub only
  std::string api_key;
  std::chrono::milliseconds timeout{10000};
  std::string system_prompt{kMentorSystemPrompt};
};

/// A chat-completion endpoint. Implementations throw Error(kMentorUnavailable)
/// on any transport or protocol failure.
class MentorBackend {
 public:
  virtual ~MentorBackend() = default;
  virtual std::string Complete(const std::string& system_prompt, const std::string& query) = 0;
};

/// Canned answers keyed by lower-case phrases, loaded from
/// mentor_responses.txt ("key | answer" per line).
class CannedMentor {
 public:
  CannedMentor() = default;
  explicit CannedMentor(std::map<std::string, std::string> answers) : answers_(std::move(answers)) {}

  /// Throws Error(kIo) or Error(kParseError).
  static CannedMentor Load(const std::filesystem::path& file);
  static CannedMentor Parse(std::string_view text);

  /// Longest canned key contained in the query, else the longest glossary id
  /// contained in it, else a general pointer to the glossary. Never empty.
  std::string Answer(std::string_view query) const;

  const std::map<std::string, std::string>& answers() const { return answers_; }

 private:
  std::map<std::string, std::string> answers_;
};

/// Throws Error(kInvalidArgument) on an empty query. With a backend the live
/// answer is returned (or its kMentorUnavailable propagates); without one the
/// canned table answers.
MentorExchange MentorAsk(std::string_view query, const CannedMentor& canned, MentorBackend* live = nullptr);

}  // namespace cadenza
