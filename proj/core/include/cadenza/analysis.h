/// @file
/// @brief Key and chord detection over a monophonic melody.

#pragma once

#include <optional>
#include <vector>

#include "cadenza/score.h"
#include "cadenza/theory.h"

namespace cadenza {

struct KeyCandidate {
  Key key;
  double score = 0;  // in [0, 1]
};

struct KeyRanking {
  std::vector<KeyCandidate> candidates;  // all 24 keys, best first
  /// The top two candidates tied even after tonic emphasis; the first in
  /// canonical order is reported as primary.
  bool ambiguous = false;

  const Key& best() const { return candidates.front().key; }
};

/// Bonus added for each of: tonic is the first note, the last note, the note
/// with the greatest total duration.
inline constexpr double kTonicEmphasisBonus = 0.1;

/// Ranks all 24 keys by the duration-weighted fraction of sounded pitch classes
/// inside each key's diatonic scale, plus tonic emphasis. Uses the first part.
/// Throws Error(kEmptyMelody) when there are no sounded notes.
KeyRanking DetectScale(const Score& melody);

/// One chord per measure of the first part: the diatonic triad (or V7) of
/// `key` covering the most sounded duration, ties broken by
/// I > V > IV > vi > ii > iii > vii° > V7. Measures without notes get nullopt.
std::vector<std::optional<ChordSymbol>> DetectChords(const Score& melody, const Key& key);

/// Candidate chords in tie-break priority order.
std::vector<std::pair<DegreeSymbol, ChordSymbol>> ChordDetectionCandidates(const Key& key);

}  // namespace cadenza
