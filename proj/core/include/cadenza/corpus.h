/// @file
/// @brief The chord-progression and rhythm-pattern database, sequence
/// similarity, and rhythm fitting.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

#include "cadenza/score.h"
#include "cadenza/theory.h"

namespace cadenza {

enum class ProgressionCategory {
  kClassic,
  kExtended,
  kDiminished,
  kAug4,
  kMixed,
  kSubstitute,
  kCycle,
};

/// Categories in tie-break order (classic first).
inline constexpr std::array<ProgressionCategory, 7> kAllCategories = {
    ProgressionCategory::kClassic,    ProgressionCategory::kExtended, ProgressionCategory::kDiminished,
    ProgressionCategory::kAug4,       ProgressionCategory::kMixed,    ProgressionCategory::kSubstitute,
    ProgressionCategory::kCycle};

/// Entries per category in a complete database.
inline constexpr std::array<int, 7> kCategoryCounts = {9, 9, 4, 4, 5, 4, 4};
inline constexpr int kProgressionCount = 39;
inline constexpr int kRhythmCount = 16;

std::string_view CategoryName(ProgressionCategory category);

/// Which key modes may use an entry.
enum class ModeFilter { kMajor, kMinor, kBoth };

std::string_view ModeFilterName(ModeFilter mode);

struct ProgressionEntry {
  std::string id;
  ProgressionCategory category = ProgressionCategory::kClassic;
  ModeFilter mode = ModeFilter::kMajor;
  std::vector<DegreeSymbol> degrees;

  bool AvailableIn(Mode key_mode) const {
    return mode == ModeFilter::kBoth || (mode == ModeFilter::kMajor) == (key_mode == Mode::kMajor);
  }

  friend bool operator==(const ProgressionEntry&, const ProgressionEntry&) = default;
};

struct RhythmEvent {
  Beats duration{1};
  EventKind kind = EventKind::kNote;

  friend bool operator==(const RhythmEvent&, const RhythmEvent&) = default;
};

struct RhythmPattern {
  int id = 0;
  std::string style;
  std::vector<RhythmEvent> events;

  Beats Total() const;
  /// Onsets (from the start of the measure) of the sounded events.
  std::vector<Beats> NoteOnsets() const;

  friend bool operator==(const RhythmPattern&, const RhythmPattern&) = default;
};

struct CorpusDb {
  std::vector<ProgressionEntry> progressions;
  std::vector<RhythmPattern> rhythms;  // sorted by id
  /// CRC-32 of the progression text followed by the rhythm text.
  std::uint32_t source_digest = 0;

  /// Throws Error(kNotFound) for unknown ids.
  const RhythmPattern& Rhythm(int id) const;
  const ProgressionEntry& Progression(std::string_view id) const;
};

/// Parses both files' contents. With `check_counts`, rejects databases whose
/// sizes or category counts differ from the fixed ones (Error kCountMismatch).
/// Errors: kParseError (message carries line:column), kCountMismatch,
/// kDurationMismatch.
CorpusDb ParseCorpus(std::string_view progression_text, std::string_view rhythm_text,
                     bool check_counts = true);

/// Reads and parses the two files. Throws Error(kIo) when a file is missing.
CorpusDb LoadCorpus(const std::filesystem::path& progression_file,
                    const std::filesystem::path& rhythm_file);

/// $CADENZA_CORPUS_DIR if set, else the directory the build was configured with.
std::filesystem::path DefaultDataDir();
/// progressions.txt and rhythms.txt from `data_dir`.
CorpusDb LoadCorpusFromDir(const std::filesystem::path& data_dir = DefaultDataDir());

/// Canonical text forms, accepted back by ParseCorpus.
std::string SerializeProgressions(const std::vector<ProgressionEntry>& entries);
std::string SerializeRhythms(const std::vector<RhythmPattern>& patterns);

using Ratio = boost::rational<std::int64_t>;

struct MatchingBlock {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t size = 0;
  friend bool operator==(const MatchingBlock&, const MatchingBlock&) = default;
};

/// Recursive longest-common-block decomposition. Among equally long blocks the
/// one starting earliest in `a` wins, then earliest in `b`.
std::vector<MatchingBlock> MatchingBlocks(const std::vector<DegreeSymbol>& a,
                                          const std::vector<DegreeSymbol>& b);

/// Gestalt pattern-matching ratio 2M / (|a| + |b|); two empty inputs give 1.
Ratio SimilarityRatio(const std::vector<DegreeSymbol>& a, const std::vector<DegreeSymbol>& b);

struct RankedProgression {
  const ProgressionEntry* entry = nullptr;
  Ratio ratio{0};
};

/// Every entry available in `key_mode`, by ratio descending, then category
/// order, then id.
std::vector<RankedProgression> RankProgressions(const std::vector<DegreeSymbol>& input,
                                                const CorpusDb& db, Mode key_mode);

enum class Slot : std::uint8_t { kRest, kOnset, kSustain };

using SlotGrid = std::array<Slot, kGridUnitsPerMeasure>;

/// One slot per 1/12 beat. Events must lie on the grid.
SlotGrid Rasterize(const Measure& measure);
SlotGrid Rasterize(const RhythmPattern& pattern);

struct RhythmFit {
  const RhythmPattern* pattern = nullptr;
  int distance = 0;  // differing slots
};

/// Closest pattern by Hamming distance over the slot grids; ties go to the
/// lowest id.
RhythmFit FitRhythm(const Measure& measure, const CorpusDb& db);

/// The measure rebuilt from a pattern: notes take `midi`.
Measure MeasureFromPattern(const RhythmPattern& pattern, int midi);

}  // namespace cadenza
