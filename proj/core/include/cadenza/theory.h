/// @file
/// @brief Keys, scales, chords and roman-numeral degrees.
///
/// Everything here is a pure function of its arguments. Pitch classes are
/// integers 0-11 with 0 = C.

#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cadenza {

using PitchClass = int;

inline constexpr PitchClass Pc(int semitones) { return ((semitones % 12) + 12) % 12; }

enum class Mode { kMajor, kMinor };

struct Key {
  PitchClass tonic = 0;
  Mode mode = Mode::kMajor;

  friend bool operator==(const Key&, const Key&) = default;

  /// Position in the canonical order: C major .. B major, then C minor .. B minor.
  int CanonicalIndex() const { return (mode == Mode::kMajor ? 0 : 12) + tonic; }
  static Key FromCanonicalIndex(int index);

  /// "D major", "F# minor".
  std::string Name() const;
  /// Tonic spelled for this key, e.g. "Bb" for Bb major, "C#" for C# minor.
  std::string TonicName() const;
};

/// All 24 keys in canonical order.
std::array<Key, 24> AllKeys();

/// Parses "D major", "a minor", "F#m", "Bb". Throws Error(kParseError).
Key ParseKey(std::string_view text);

enum class ChordQuality {
  kMajor,
  kMinor,
  kDiminished,
  kAugmented4,
  kMajor7,
  kMinor7,
  kDominant7,
};

inline constexpr std::array<ChordQuality, 7> kAllQualities = {
    ChordQuality::kMajor,  ChordQuality::kMinor,  ChordQuality::kDiminished,
    ChordQuality::kAugmented4, ChordQuality::kMajor7, ChordQuality::kMinor7,
    ChordQuality::kDominant7};

bool IsSeventh(ChordQuality quality);
/// Semitone offsets from the root, ascending.
std::vector<int> QualityIntervals(ChordQuality quality);
/// Human-readable quality, e.g. "major", "dominant seventh".
std::string_view QualityName(ChordQuality quality);

/// An absolute chord. Equality ignores spelling.
struct ChordSymbol {
  PitchClass root = 0;
  ChordQuality quality = ChordQuality::kMajor;
  /// Root spelling ("Eb", "C#"). Empty means the default spelling for the pitch class.
  std::string root_name;

  ChordSymbol() = default;
  ChordSymbol(PitchClass r, ChordQuality q, std::string name = {})
      : root(Pc(r)), quality(q), root_name(std::move(name)) {}

  /// Canonical display, e.g. "Em", "A7", "C#dim", "Ebmaj7".
  std::string Display() const;

  friend bool operator==(const ChordSymbol& a, const ChordSymbol& b) {
    return a.root == b.root && a.quality == b.quality;
  }
};

/// Parses note-name ["m"|"dim"|"aug4"|"maj7"|"m7"|"7"]. Throws Error(kParseError).
ChordSymbol ParseChord(std::string_view text);

/// Root-position chord tones as pitch classes, root first.
std::vector<PitchClass> ChordTones(const ChordSymbol& chord);
/// The first three chord tones (the triad the left hand plays).
std::vector<PitchClass> TriadTones(const ChordSymbol& chord);
bool IsChordTone(const ChordSymbol& chord, PitchClass pc);

/// A chord written as a scale degree of some key.
struct DegreeSymbol {
  int degree = 1;  // 1-7
  ChordQuality quality = ChordQuality::kMajor;
  bool flat = false;  // bII-type chromatic root

  /// Roman numeral display: "I", "ii", "viidim", "V7", "Imaj7", "bIImaj7".
  /// A tonic augmented-fourth chord displays as the bare token "aug4".
  std::string Display() const;

  friend bool operator==(const DegreeSymbol&, const DegreeSymbol&) = default;
  friend auto operator<=>(const DegreeSymbol&, const DegreeSymbol&) = default;
};

/// Parses ["b"] roman ["dim"|"°"|"aug4"|"maj7"|"7"]; case of the numeral
/// encodes major/minor. Throws Error(kParseError).
DegreeSymbol ParseDegree(std::string_view text);

/// Splits on whitespace, commas, "-", "–" and parses each token.
std::vector<DegreeSymbol> ParseDegreeSequence(std::string_view text);
std::string JoinDegrees(const std::vector<DegreeSymbol>& degrees,
                        std::string_view separator = "-");

/// Major or natural-minor scale, ascending from the tonic.
std::array<PitchClass, 7> DiatonicScale(const Key& key);
/// Harmonic-minor leading tone; nullopt for major keys.
std::optional<PitchClass> RaisedSeventh(const Key& key);
/// Scale members plus the raised seventh in minor.
std::vector<PitchClass> ExtendedScale(const Key& key);
bool InExtendedScale(const Key& key, PitchClass pc);

/// Letter-correct spelling of each scale degree, e.g. {"F#", "G#", "A#", "B", ...}.
std::array<std::string, 7> SpelledScale(const Key& key);
/// True when the key signature uses sharps (or nothing).
bool IsSharpSide(const Key& key);
/// Pitch-class name in the context of a key.
std::string SpellPitchClass(PitchClass pc, const Key& key);
/// "F#4"; middle C is "C4".
std::string SpellMidi(int midi, const Key& key);

/// Stacked-third triads on each degree; in minor, V and vii° use the raised seventh.
std::vector<std::pair<DegreeSymbol, ChordSymbol>> DiatonicTriads(const Key& key);
/// Stacked-third seventh on a degree, when its quality is representable
/// (maj7, m7, dominant 7). Half- and fully-diminished sevenths yield nullopt.
std::optional<std::pair<DegreeSymbol, ChordSymbol>> DiatonicSeventh(const Key& key, int degree);

ChordSymbol DegreeToChord(const DegreeSymbol& degree, const Key& key);
/// Throws Error(kNonDiatonicChord) when the root is neither diatonic nor bII.
DegreeSymbol ChordToDegree(const ChordSymbol& chord, const Key& key);

/// Harmonic function label for a degree: "tonic", "subdominant", "dominant".
std::string_view HarmonicFunction(const DegreeSymbol& degree);

}  // namespace cadenza
