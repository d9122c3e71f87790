#include "cadenza/analysis.h"

#include <algorithm>
#include <array>

#include "cadenza/errors.h"

namespace cadenza {

namespace {

struct MelodyProfile {
  std::array<Beats, 12> weight{};  // sounded duration per pitch class
  Beats total{0};
  PitchClass first = -1;
  PitchClass last = -1;
  PitchClass longest = -1;
};

MelodyProfile Profile(const Score& melody) {
  MelodyProfile p;
  if (melody.parts.empty()) return p;
  for (const auto& measure : melody.parts.front().measures) {
    for (const auto& e : measure.events) {
      if (!e.is_note()) continue;
      PitchClass pc = e.pitch->pitch_class();
      p.weight[pc] += e.duration;
      p.total += e.duration;
      if (p.first < 0) p.first = pc;
      p.last = pc;
    }
  }
  // Ties go to the pitch class heard first.
  Beats best{0};
  if (p.total > 0) {
    std::vector<PitchClass> order;
    for (const auto& measure : melody.parts.front().measures) {
      for (const auto& e : measure.events) {
        if (e.is_note() && std::find(order.begin(), order.end(), e.pitch->pitch_class()) == order.end()) {
          order.push_back(e.pitch->pitch_class());
        }
      }
    }
    for (PitchClass pc : order) {
      if (p.weight[pc] > best) {
        best = p.weight[pc];
        p.longest = pc;
      }
    }
  }
  return p;
}

// Kept rational so that ties compare exactly.
struct ExactScore {
  Beats coverage;  // in [0, 1]
  int emphasis = 0;

  Beats value() const { return coverage + Beats(emphasis, 10); }
};

}  // namespace

KeyRanking DetectScale(const Score& melody) {
  MelodyProfile profile = Profile(melody);
  if (profile.total == 0) {
    throw Error(ErrorCode::kEmptyMelody, "melody has no sounded notes");
  }
  struct Scored {
    Key key;
    ExactScore score;
  };
  std::vector<Scored> scored;
  for (const Key& key : AllKeys()) {
    Beats inside{0};
    for (PitchClass pc : DiatonicScale(key)) inside += profile.weight[pc];
    ExactScore s{inside / profile.total, 0};
    if (profile.first == key.tonic) ++s.emphasis;
    if (profile.last == key.tonic) ++s.emphasis;
    if (profile.longest == key.tonic) ++s.emphasis;
    scored.push_back({key, s});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.score.value() > b.score.value();
  });

  KeyRanking ranking;
  const double max_value = 1.0 + 3 * kTonicEmphasisBonus;
  for (const auto& s : scored) {
    double v = boost::rational_cast<double>(s.score.value());
    ranking.candidates.push_back({s.key, v / max_value});
  }
  ranking.ambiguous = scored[0].score.value() == scored[1].score.value();
  return ranking;
}

std::vector<std::pair<DegreeSymbol, ChordSymbol>> ChordDetectionCandidates(const Key& key) {
  auto triads = DiatonicTriads(key);
  std::vector<std::pair<DegreeSymbol, ChordSymbol>> out;
  for (int degree : {1, 5, 4, 6, 2, 3, 7}) out.push_back(triads[degree - 1]);
  if (auto v7 = DiatonicSeventh(key, 5)) out.push_back(*v7);
  return out;
}

std::vector<std::optional<ChordSymbol>> DetectChords(const Score& melody, const Key& key) {
  std::vector<std::optional<ChordSymbol>> out;
  if (melody.parts.empty()) return out;
  auto candidates = ChordDetectionCandidates(key);
  for (const auto& measure : melody.parts.front().measures) {
    if (!measure.HasSoundedNotes()) {
      out.push_back(std::nullopt);
      continue;
    }
    const ChordSymbol* best = nullptr;
    Beats best_cover{-1};
    for (const auto& [degree, chord] : candidates) {
      Beats cover{0};
      for (const auto& e : measure.events) {
        if (e.is_note() && IsChordTone(chord, e.pitch->pitch_class())) cover += e.duration;
      }
      if (cover > best_cover) {
        best_cover = cover;
        best = &chord;
      }
    }
    out.push_back(*best);
  }
  return out;
}

}  // namespace cadenza
