/// @file
/// @brief Phrase-by-phrase continuation of an analyzed melody: progression
/// recommendation, diatonic substitution, rhythm planning, two-hand
/// realization and ornamentation.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cadenza/analysis.h"
#include "cadenza/corpus.h"
#include "cadenza/rng.h"
#include "cadenza/score.h"

namespace cadenza {

struct GenerationConfig {
  std::uint64_t seed = 42;
  double substitution_probability = 0.2;
  double ornament_rate = 0.05;
  int right_hand_low = 60;
  int right_hand_high = 84;
  int left_hand_low = 36;
  int left_hand_high = 59;

  /// Throws Error(kInvalidArgument) for probabilities outside [0, 1] or
  /// overlapping / inverted registers.
  void Validate() const;

  friend bool operator==(const GenerationConfig&, const GenerationConfig&) = default;
};

struct MelodyAnalysis {
  KeyRanking ranking;
  Key key;
  std::vector<std::optional<ChordSymbol>> chords;  // per input measure
  std::vector<DegreeSymbol> degrees;               // measures that have a chord, in order
  int fitted_rhythm = 1;                           // fitted to the first measure
  int fit_distance = 0;
};

/// DetectScale, DetectChords, ChordToDegree and FitRhythm on the first part.
/// Throws Error(kEmptyMelody) when nothing sounds.
MelodyAnalysis AnalyzeMelody(const Score& melody, const CorpusDb& db);

struct Phrase {
  std::string progression_id;             // corpus entry the phrase came from
  Ratio similarity{0};                    // of that entry against the context
  std::vector<DegreeSymbol> recommended;  // the entry's degrees
  std::vector<DegreeSymbol> progression;  // after substitution and edits
  std::vector<ChordSymbol> chords;
  std::vector<bool> substituted;
  int first_measure = 0;  // index into the piece
  std::vector<int> rhythm_plan;

  int measure_count() const { return static_cast<int>(progression.size()); }
  int last_measure() const { return first_measure + measure_count() - 1; }
};

struct Recommendation {
  const ProgressionEntry* entry = nullptr;
  Ratio ratio{0};
};

/// The best-ranked entry for `context` that is not in `used_ids`, after
/// skipping a further click_index - used_ids.size() unused candidates (so a
/// fresh caller can ask for "the k-th recommendation" directly).
/// Throws Error(kCorpusExhausted) when click_index reaches the number of
/// entries available in the key's mode.
Recommendation RecommendProgression(const std::vector<DegreeSymbol>& context, const Key& key,
                                    const CorpusDb& db, std::size_t click_index,
                                    const std::vector<std::string>& used_ids = {});

/// Diatonic partners sharing at least two chord tones with `degree`'s chord.
/// Pairs: I-vi, I-iii, IV-ii, V-vii° (both directions). Sevenths map to the
/// partner's diatonic seventh when it exists, otherwise its triad.
std::vector<DegreeSymbol> SubstitutionCandidates(const DegreeSymbol& degree, const Key& key);

struct Substitution {
  std::vector<DegreeSymbol> progression;
  std::vector<bool> substituted;
};

/// Each interior chord is replaced with probability p by one of its
/// candidates. One Unit() draw per interior chord, plus a Below(n) draw to
/// pick among several candidates.
Substitution ApplySubstitution(const std::vector<DegreeSymbol>& progression, const Key& key,
                               Rng& rng, double p);

/// [fitted, a, b, a, b, ...] with a, b drawn without replacement from the
/// other fifteen ids (ascending order, indices drawn by SampleWithoutReplacement).
std::vector<int> PlanRhythms(int fitted_id, const CorpusDb& db, Rng& rng, int phrase_len);

/// Root-position triad for the left hand: the root is the lowest pitch >= low
/// with the chord's root pitch class.
std::vector<int> LeftHandVoicing(const ChordSymbol& chord, int low = 36);

/// One whole-note block per chord.
Part RealizeLeftHand(const std::vector<ChordSymbol>& chords, const GenerationConfig& config = {});

/// Pitch for a strong-beat onset: the chord tone that is also in the extended
/// scale nearest to `previous` (ties to the lower), inside the register.
int StrongBeatPitch(const ChordSymbol& chord, const Key& key, int previous, int low, int high);
/// One diatonic step from `previous` in the given direction, reversed when it
/// would leave the register.
int StepPitch(const Key& key, int previous, bool up, int low, int high);
/// Nearest extended-scale pitch to `midi`, ties upward.
int SnapToScale(int midi, const Key& key);

/// One measure of right-hand melody under `rhythm`. Notes at beats 0 and 2
/// take StrongBeatPitch, other notes a StepPitch with direction rng.Below(2).
/// `previous` is updated to the last sounded pitch.
Measure RealizeRightHandMeasure(const ChordSymbol& chord, const Key& key, const RhythmPattern& rhythm,
                                Rng& rng, int& previous, const GenerationConfig& config = {});

Part RealizeRightHand(const std::vector<ChordSymbol>& chords, const Key& key,
                      const std::vector<int>& rhythm_plan, const CorpusDb& db, Rng& rng,
                      int& previous, const GenerationConfig& config = {});

/// round-half-up(rate * n).
int OrnamentCount(double rate, int sounded_notes);

/// The ornament a note would receive: the upper-neighbour ornament
/// (appoggiatura below one beat, trill from one beat) or the mordent,
/// whichever has its auxiliary nearer a chord tone; ties keep the upper one.
std::optional<OrnamentTag> ChooseOrnament(const NoteEvent& note, const ChordSymbol& chord, const Key& key);

/// Tags `count` sounded notes, positions drawn without replacement among the
/// notes that can carry an ornament. Measures must carry their chord.
/// Returns the number of notes tagged.
int AddOrnaments(std::vector<Measure*> measures, const Key& key, Rng& rng, int count);

/// A piece under construction: the input melody followed by generated phrases.
struct Piece {
  Score score;  // parts[0] right hand, parts[1] left hand
  MelodyAnalysis analysis;
  int input_measures = 0;
  std::vector<Phrase> phrases;
  /// Input degrees followed by every phrase's progression.
  std::vector<DegreeSymbol> context;
  bool ended = false;

  std::vector<std::string> used_progressions() const;
  /// Index of the phrase covering a measure, if any.
  std::optional<std::size_t> PhraseOf(int measure) const;
};

/// Two-part piece with the input in the right hand and whole rests in the
/// left hand; input measures carry the detected chords.
Piece StartPiece(const Score& melody, const MelodyAnalysis& analysis);

/// Recommends, substitutes, plans, realizes and ornaments the next phrase.
/// Phrase k draws from Rng::ForStream(seed, k). Throws kCorpusExhausted.
const Phrase& ContinuePiece(Piece& piece, const CorpusDb& db, const GenerationConfig& config);

/// Appends a tonic whole-note measure (triad in both hands) and freezes the piece.
void EndPiece(Piece& piece, const GenerationConfig& config = {});

/// Chords that may replace a generated measure's chord: the seven diatonic
/// triads and V7.
std::vector<DegreeSymbol> OfferedDegrees(const Key& key);

enum class EditField { kDegree, kRhythm };

/// Re-realizes a generated measure with a new degree or rhythm id. Both hands
/// are rebuilt; the right hand draws from Rng::ForStream(seed, kEditStream +
/// measure) and keeps the measure's previous ornament count.
/// Errors: kForbidden (input or cadence measure), kNotOffered, kScopeOutOfRange.
void EditMeasure(Piece& piece, int measure, EditField field, const std::string& value,
                 const CorpusDb& db, const GenerationConfig& config);

inline constexpr std::uint64_t kEditStream = 1ULL << 32;

}  // namespace cadenza
