/// @file
/// @brief Symbolic score model: measures of note events with exact rational timing.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "cadenza/theory.h"

// Boost 1.74 compares rational<T> with a different integer type through a
// template that C++20 rewrites into a call to itself. These exact overloads
// win overload resolution and keep `beats == 0` well defined.
namespace boost {
inline bool operator==(const rational<std::int64_t>& a, int b) { return a == rational<std::int64_t>(b); }
inline bool operator==(int b, const rational<std::int64_t>& a) { return a == rational<std::int64_t>(b); }
inline bool operator!=(const rational<std::int64_t>& a, int b) { return !(a == rational<std::int64_t>(b)); }
inline bool operator!=(int b, const rational<std::int64_t>& a) { return !(a == rational<std::int64_t>(b)); }
}  // namespace boost

namespace cadenza {

/// Quarter-note beats, exact.
using Beats = boost::rational<std::int64_t>;

inline constexpr int kBeatsPerMeasure = 4;
inline const Beats kMeasureLength{kBeatsPerMeasure};

struct Pitch {
  int midi = 60;

  PitchClass pitch_class() const { return Pc(midi); }
  friend auto operator<=>(const Pitch&, const Pitch&) = default;
};

enum class OrnamentKind { kAppoggiatura, kMordent, kTrill };

std::string_view OrnamentName(OrnamentKind kind);

/// An ornament decorating a single main note. The main note keeps its full
/// duration in the score; ExpandOrnaments produces the literal notes.
struct OrnamentTag {
  OrnamentKind kind = OrnamentKind::kAppoggiatura;
  Pitch auxiliary;

  friend bool operator==(const OrnamentTag&, const OrnamentTag&) = default;
};

enum class EventKind { kNote, kRest };

struct NoteEvent {
  EventKind kind = EventKind::kRest;
  std::optional<Pitch> pitch;  // set iff kind == kNote
  Beats duration{1};
  Beats onset{0};  // from the start of the measure
  std::optional<OrnamentTag> ornament;

  bool is_note() const { return kind == EventKind::kNote; }
  Beats end() const { return onset + duration; }

  static NoteEvent Note(int midi, Beats onset, Beats duration) {
    return NoteEvent{EventKind::kNote, Pitch{midi}, duration, onset, std::nullopt};
  }
  static NoteEvent Rest(Beats onset, Beats duration) {
    return NoteEvent{EventKind::kRest, std::nullopt, duration, onset, std::nullopt};
  }

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

enum class MeasureSource { kInput, kGenerated, kEdited };

std::string_view MeasureSourceName(MeasureSource source);

struct Measure {
  int index = 0;
  std::vector<NoteEvent> events;  // sorted by onset; chords share an onset
  std::optional<ChordSymbol> chord;
  MeasureSource source = MeasureSource::kInput;

  /// Sum of sounded note durations.
  Beats SoundedDuration() const;
  bool HasSoundedNotes() const;
};

enum class HandRole { kRightHand, kLeftHand };

struct Part {
  HandRole role = HandRole::kRightHand;
  std::vector<Measure> measures;
};

struct Score {
  std::vector<Part> parts;
  int bpm = 120;
  std::optional<Key> key;

  size_t measure_count() const { return parts.empty() ? 0 : parts.front().measures.size(); }
};

inline constexpr std::int64_t kGridUnitsPerBeat = 12;
inline constexpr std::int64_t kGridUnitsPerMeasure = kGridUnitsPerBeat * kBeatsPerMeasure;

/// A note on the 1/12-beat grid, in units from the start of the piece.
struct GridNote {
  std::int64_t start = 0;
  std::int64_t end = 0;
  int midi = 60;
};

/// Places notes into measures (splitting at barlines) and pads with rests.
Part PartFromGridNotes(const std::vector<GridNote>& notes, size_t measure_count, HandRole role);
/// Number of whole measures needed to hold `units` grid units.
size_t MeasuresCovering(std::int64_t units);

/// True when the events are sorted, lie in [0, 4] and cover the whole measure
/// (every instant is inside some event).
bool MeasureIsComplete(const Measure& measure);

/// Sorts events by onset (then pitch) and fills uncovered spans with rests.
void NormalizeMeasure(Measure& measure);

/// Returns a copy where every ornamented note is replaced by the literal notes
/// that realize it. Ornament tags are dropped.
Score ExpandOrnaments(const Score& score);
/// Literal notes for one ornamented note; slices lie on the 1/12-beat grid.
///   appoggiatura: auxiliary for the first half (rounded down), then main.
///   mordent: main, lower auxiliary, each floor(d/8), then main for the rest.
///   trill: main/auxiliary alternating in 1/4-beat slices, last slice shortened.
std::vector<NoteEvent> ExpandOrnament(const NoteEvent& note);
/// Whether a note of this duration can carry the ornament.
bool OrnamentFits(OrnamentKind kind, const Beats& duration);

/// Equal parts, measure counts, and sounded notes (pitch/onset/duration, in
/// order) per measure. Rest segmentation, chords, sources, key and ornament
/// tags are ignored.
bool SameNoteContent(const Score& a, const Score& b);

/// Diatonic neighbour strictly above / below `midi` within the key's scale.
int UpperNeighbor(int midi, const Key& key);
int LowerNeighbor(int midi, const Key& key);

std::string FormatBeats(const Beats& beats);

}  // namespace cadenza
