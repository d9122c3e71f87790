#include "cadenza/corpus.h"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/crc.hpp>

#include "cadenza/errors.h"

#ifndef CADENZA_DEFAULT_DATA_DIR
#define CADENZA_DEFAULT_DATA_DIR "data"
#endif

namespace cadenza {

namespace {

constexpr std::string_view kWhitespace = " \t\r";

std::string_view Trim(std::string_view s) {
  auto b = s.find_first_not_of(kWhitespace);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(kWhitespace);
  return s.substr(b, e - b + 1);
}

[[noreturn]] void Fail(const std::string& file, int line, std::size_t column, const std::string& what) {
  throw Error(ErrorCode::kParseError,
              file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
}

struct Field {
  std::string_view text;
  std::size_t column = 1;  // 1-based, of the trimmed text
};

std::vector<Field> SplitFields(std::string_view line) {
  std::vector<Field> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t bar = line.find('|', start);
    std::string_view raw = line.substr(start, bar == std::string_view::npos ? line.size() - start : bar - start);
    std::size_t lead = raw.find_first_not_of(kWhitespace);
    fields.push_back({Trim(raw), start + (lead == std::string_view::npos ? 0 : lead) + 1});
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return fields;
}

// Calls fn(line_number, content) for each non-blank, non-comment line.
template <typename Fn>
void ForEachLine(std::string_view text, Fn fn) {
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    ++number;
    std::string_view body = Trim(line);
    if (!body.empty() && body.front() != '#') fn(number, line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

ProgressionCategory ParseCategory(std::string_view s, int line, std::size_t col) {
  for (auto c : kAllCategories) {
    if (CategoryName(c) == s) return c;
  }
  Fail("progressions", line, col, "unknown category '" + std::string(s) + "'");
}

ModeFilter ParseModeFilter(std::string_view s, int line, std::size_t col) {
  if (s == "major") return ModeFilter::kMajor;
  if (s == "minor") return ModeFilter::kMinor;
  if (s == "both") return ModeFilter::kBoth;
  Fail("progressions", line, col, "mode must be major, minor or both");
}

std::vector<ProgressionEntry> ParseProgressions(std::string_view text) {
  std::vector<ProgressionEntry> out;
  std::set<std::string, std::less<>> ids;
  ForEachLine(text, [&](int line, std::string_view content) {
    auto fields = SplitFields(content);
    if (fields.size() != 4) Fail("progressions", line, 1, "expected 'id | category | mode | degrees'");
    ProgressionEntry entry;
    entry.id = std::string(fields[0].text);
    if (entry.id.empty()) Fail("progressions", line, fields[0].column, "empty id");
    if (!ids.insert(entry.id).second) {
      Fail("progressions", line, fields[0].column, "duplicate id '" + entry.id + "'");
    }
    entry.category = ParseCategory(fields[1].text, line, fields[1].column);
    entry.mode = ParseModeFilter(fields[2].text, line, fields[2].column);
    try {
      entry.degrees = ParseDegreeSequence(fields[3].text);
    } catch (const Error& e) {
      Fail("progressions", line, fields[3].column, e.what());
    }
    if (entry.degrees.size() < 3) {
      Fail("progressions", line, fields[3].column, "a progression needs at least three chords");
    }
    out.push_back(std::move(entry));
  });
  return out;
}

bool AllowedDenominator(std::int64_t d) {
  static constexpr std::int64_t kAllowed[] = {1, 2, 3, 4, 6, 8, 12, 16};
  return std::find(std::begin(kAllowed), std::end(kAllowed), d) != std::end(kAllowed);
}

std::int64_t ParseInt(std::string_view s, int line, std::size_t col) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    Fail("rhythms", line, col, "expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

// "(dur kind) (dur kind) * n ..." starting at `offset` within the line.
std::vector<RhythmEvent> ParseRhythmEvents(std::string_view s, std::size_t offset, int line) {
  std::vector<RhythmEvent> out;
  std::size_t group_start = 0;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < s.size() && kWhitespace.find(s[i]) != std::string_view::npos) ++i;
  };
  auto read_word = [&] {
    std::size_t b = i;
    while (i < s.size() && s[i] != ')' && s[i] != '(' && kWhitespace.find(s[i]) == std::string_view::npos) ++i;
    return s.substr(b, i - b);
  };
  while (true) {
    skip_ws();
    if (i >= s.size()) break;
    std::size_t col = offset + i;
    if (s[i] == '(') {
      ++i;
      skip_ws();
      std::size_t dur_col = offset + i;
      std::string_view dur = read_word();
      skip_ws();
      std::size_t kind_col = offset + i;
      std::string_view kind = read_word();
      skip_ws();
      if (i >= s.size() || s[i] != ')') Fail("rhythms", line, offset + i, "expected ')'");
      ++i;
      auto slash = dur.find('/');
      std::int64_t num = ParseInt(dur.substr(0, slash), line, dur_col);
      std::int64_t den = slash == std::string_view::npos ? 1 : ParseInt(dur.substr(slash + 1), line, dur_col);
      if (num <= 0 || den <= 0) Fail("rhythms", line, dur_col, "duration must be positive");
      Beats beats(num, den);
      if (!AllowedDenominator(beats.denominator()) || (beats * kGridUnitsPerBeat).denominator() != 1) {
        Fail("rhythms", line, dur_col, "duration " + std::string(dur) + " is not on the 1/12-beat grid");
      }
      RhythmEvent ev;
      ev.duration = beats;
      if (kind == "note") {
        ev.kind = EventKind::kNote;
      } else if (kind == "rest") {
        ev.kind = EventKind::kRest;
      } else {
        Fail("rhythms", line, kind_col, "kind must be 'note' or 'rest'");
      }
      out.push_back(ev);
    } else if (s[i] == '*') {
      ++i;
      skip_ws();
      std::size_t n_col = offset + i;
      std::int64_t n = ParseInt(read_word(), line, n_col);
      if (n < 1 || n > 48) Fail("rhythms", line, n_col, "repeat count out of range");
      if (group_start == out.size()) Fail("rhythms", line, col, "nothing to repeat");
      std::vector<RhythmEvent> group(out.begin() + static_cast<std::ptrdiff_t>(group_start), out.end());
      for (std::int64_t k = 1; k < n; ++k) out.insert(out.end(), group.begin(), group.end());
      group_start = out.size();
    } else {
      Fail("rhythms", line, col, std::string("unexpected '") + s[i] + "'");
    }
  }
  return out;
}

std::vector<RhythmPattern> ParseRhythms(std::string_view text) {
  std::vector<RhythmPattern> out;
  std::set<int> ids;
  ForEachLine(text, [&](int line, std::string_view content) {
    auto fields = SplitFields(content);
    if (fields.size() != 3) Fail("rhythms", line, 1, "expected 'id | style | events'");
    RhythmPattern p;
    p.id = static_cast<int>(ParseInt(fields[0].text, line, fields[0].column));
    if (!ids.insert(p.id).second) Fail("rhythms", line, fields[0].column, "duplicate id");
    p.style = std::string(fields[1].text);
    p.events = ParseRhythmEvents(fields[2].text, fields[2].column, line);
    if (p.events.empty()) Fail("rhythms", line, fields[2].column, "empty pattern");
    if (p.Total() != kMeasureLength) {
      throw Error(ErrorCode::kDurationMismatch, "rhythm " + std::to_string(p.id) + " (line " +
                                                    std::to_string(line) + ") lasts " +
                                                    FormatBeats(p.Total()) + " beats, not 4");
    }
    out.push_back(std::move(p));
  });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

void CheckCounts(const CorpusDb& db) {
  if (db.progressions.size() != kProgressionCount) {
    throw Error(ErrorCode::kCountMismatch, "expected " + std::to_string(kProgressionCount) +
                                               " progressions, found " +
                                               std::to_string(db.progressions.size()));
  }
  for (std::size_t c = 0; c < kAllCategories.size(); ++c) {
    auto n = std::count_if(db.progressions.begin(), db.progressions.end(),
                           [&](const auto& e) { return e.category == kAllCategories[c]; });
    if (n != kCategoryCounts[c]) {
      throw Error(ErrorCode::kCountMismatch,
                  "category " + std::string(CategoryName(kAllCategories[c])) + " has " +
                      std::to_string(n) + " entries, expected " + std::to_string(kCategoryCounts[c]));
    }
  }
  if (db.rhythms.size() != kRhythmCount) {
    throw Error(ErrorCode::kCountMismatch, "expected " + std::to_string(kRhythmCount) +
                                               " rhythm patterns, found " +
                                               std::to_string(db.rhythms.size()));
  }
  for (int id = 1; id <= kRhythmCount; ++id) {
    if (db.rhythms[id - 1].id != id) {
      throw Error(ErrorCode::kCountMismatch, "rhythm ids must be 1-16");
    }
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int CategoryRank(ProgressionCategory c) {
  return static_cast<int>(std::find(kAllCategories.begin(), kAllCategories.end(), c) -
                          kAllCategories.begin());
}

// Longest a[alo:ahi] == b[blo:bhi] block; earliest in a, then earliest in b.
MatchingBlock LongestMatch(const std::vector<DegreeSymbol>& a, const std::vector<DegreeSymbol>& b,
                           std::size_t alo, std::size_t ahi, std::size_t blo, std::size_t bhi) {
  MatchingBlock best{alo, blo, 0};
  // prev[j - blo + 1]: length of the common run ending at a[i - 1], b[j].
  std::vector<std::size_t> prev(bhi - blo + 1, 0), cur(bhi - blo + 1, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      std::size_t k = a[i] == b[j] ? prev[j - blo] + 1 : 0;
      cur[j - blo + 1] = k;
      if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
    }
    std::swap(prev, cur);
  }
  return best;
}

}  // namespace

std::string_view CategoryName(ProgressionCategory category) {
  switch (category) {
    case ProgressionCategory::kClassic: return "classic";
    case ProgressionCategory::kExtended: return "extended";
    case ProgressionCategory::kDiminished: return "diminished";
    case ProgressionCategory::kAug4: return "aug4";
    case ProgressionCategory::kMixed: return "mixed";
    case ProgressionCategory::kSubstitute: return "substitute";
    case ProgressionCategory::kCycle: return "cycle";
  }
  return "";
}

std::string_view ModeFilterName(ModeFilter mode) {
  switch (mode) {
    case ModeFilter::kMajor: return "major";
    case ModeFilter::kMinor: return "minor";
    case ModeFilter::kBoth: return "both";
  }
  return "";
}

Beats RhythmPattern::Total() const {
  Beats total{0};
  for (const auto& e : events) total += e.duration;
  return total;
}

std::vector<Beats> RhythmPattern::NoteOnsets() const {
  std::vector<Beats> out;
  Beats t{0};
  for (const auto& e : events) {
    if (e.kind == EventKind::kNote) out.push_back(t);
    t += e.duration;
  }
  return out;
}

const RhythmPattern& CorpusDb::Rhythm(int id) const {
  for (const auto& r : rhythms) {
    if (r.id == id) return r;
  }
  throw Error(ErrorCode::kNotFound, "no rhythm pattern " + std::to_string(id));
}

const ProgressionEntry& CorpusDb::Progression(std::string_view id) const {
  for (const auto& p : progressions) {
    if (p.id == id) return p;
  }
  throw Error(ErrorCode::kNotFound, "no progression " + std::string(id));
}

CorpusDb ParseCorpus(std::string_view progression_text, std::string_view rhythm_text, bool check_counts) {
  CorpusDb db;
  db.progressions = ParseProgressions(progression_text);
  db.rhythms = ParseRhythms(rhythm_text);
  if (check_counts) CheckCounts(db);
  boost::crc_32_type crc;
  crc.process_bytes(progression_text.data(), progression_text.size());
  crc.process_bytes(rhythm_text.data(), rhythm_text.size());
  db.source_digest = crc.checksum();
  return db;
}

CorpusDb LoadCorpus(const std::filesystem::path& progression_file,
                    const std::filesystem::path& rhythm_file) {
  return ParseCorpus(ReadFile(progression_file), ReadFile(rhythm_file));
}

std::filesystem::path DefaultDataDir() {
  if (const char* env = std::getenv("CADENZA_CORPUS_DIR"); env && *env) return env;
  return CADENZA_DEFAULT_DATA_DIR;
}

CorpusDb LoadCorpusFromDir(const std::filesystem::path& data_dir) {
  return LoadCorpus(data_dir / "progressions.txt", data_dir / "rhythms.txt");
}

std::string SerializeProgressions(const std::vector<ProgressionEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.id + " | " + std::string(CategoryName(e.category)) + " | " +
           std::string(ModeFilterName(e.mode)) + " | " + JoinDegrees(e.degrees, " ") + "\n";
  }
  return out;
}

std::string SerializeRhythms(const std::vector<RhythmPattern>& patterns) {
  std::string out;
  for (const auto& p : patterns) {
    out += std::to_string(p.id) + " | " + p.style + " |";
    for (const auto& e : p.events) {
      out += " (" + FormatBeats(e.duration) + (e.kind == EventKind::kNote ? " note)" : " rest)");
    }
    out += "\n";
  }
  return out;
}

std::vector<MatchingBlock> MatchingBlocks(const std::vector<DegreeSymbol>& a,
                                          const std::vector<DegreeSymbol>& b) {
  std::vector<MatchingBlock> out;
  struct Range {
    std::size_t alo, ahi, blo, bhi;
  };
  std::vector<Range> todo = {{0, a.size(), 0, b.size()}};
  while (!todo.empty()) {
    Range r = todo.back();
    todo.pop_back();
    if (r.alo >= r.ahi || r.blo >= r.bhi) continue;
    MatchingBlock m = LongestMatch(a, b, r.alo, r.ahi, r.blo, r.bhi);
    if (m.size == 0) continue;
    out.push_back(m);
    todo.push_back({r.alo, m.a, r.blo, m.b});
    todo.push_back({m.a + m.size, r.ahi, m.b + m.size, r.bhi});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  return out;
}

Ratio SimilarityRatio(const std::vector<DegreeSymbol>& a, const std::vector<DegreeSymbol>& b) {
  const auto total = static_cast<std::int64_t>(a.size() + b.size());
  if (total == 0) return Ratio(1);
  std::int64_t matched = 0;
  for (const auto& m : MatchingBlocks(a, b)) matched += static_cast<std::int64_t>(m.size);
  return Ratio(2 * matched, total);
}

std::vector<RankedProgression> RankProgressions(const std::vector<DegreeSymbol>& input,
                                                const CorpusDb& db, Mode key_mode) {
  std::vector<RankedProgression> out;
  for (const auto& entry : db.progressions) {
    if (entry.AvailableIn(key_mode)) out.push_back({&entry, SimilarityRatio(input, entry.degrees)});
  }
  std::sort(out.begin(), out.end(), [](const RankedProgression& x, const RankedProgression& y) {
    if (x.ratio != y.ratio) return x.ratio > y.ratio;
    int cx = CategoryRank(x.entry->category), cy = CategoryRank(y.entry->category);
    if (cx != cy) return cx < cy;
    return x.entry->id < y.entry->id;
  });
  return out;
}

SlotGrid Rasterize(const Measure& measure) {
  SlotGrid grid;
  grid.fill(Slot::kRest);
  for (const auto& e : measure.events) {
    if (!e.is_note()) continue;
    Beats s = e.onset * kGridUnitsPerBeat, f = e.end() * kGridUnitsPerBeat;
    auto start = static_cast<std::int64_t>(boost::rational_cast<double>(s) + 0.5);
    auto end = static_cast<std::int64_t>(boost::rational_cast<double>(f) + 0.5);
    start = std::clamp<std::int64_t>(start, 0, kGridUnitsPerMeasure);
    end = std::clamp<std::int64_t>(end, start, kGridUnitsPerMeasure);
    for (std::int64_t i = start; i < end; ++i) grid[i] = i == start ? Slot::kOnset : Slot::kSustain;
  }
  return grid;
}

SlotGrid Rasterize(const RhythmPattern& pattern) {
  return Rasterize(MeasureFromPattern(pattern, 60));
}

RhythmFit FitRhythm(const Measure& measure, const CorpusDb& db) {
  SlotGrid target = Rasterize(measure);
  RhythmFit best;
  for (const auto& pattern : db.rhythms) {
    SlotGrid g = Rasterize(pattern);
    int d = 0;
    for (std::size_t i = 0; i < g.size(); ++i) d += g[i] != target[i];
    if (best.pattern == nullptr || d < best.distance) best = {&pattern, d};
  }
  if (best.pattern == nullptr) throw Error(ErrorCode::kInvalidArgument, "rhythm database is empty");
  return best;
}

Measure MeasureFromPattern(const RhythmPattern& pattern, int midi) {
  Measure m;
  Beats t{0};
  for (const auto& e : pattern.events) {
    m.events.push_back(e.kind == EventKind::kNote ? NoteEvent::Note(midi, t, e.duration)
                                                  : NoteEvent::Rest(t, e.duration));
    t += e.duration;
  }
  return m;
}

}  // namespace cadenza
