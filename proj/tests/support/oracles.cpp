#include "oracles.h"

#include <stdexcept>

namespace cadenza::testing {

namespace {

std::int64_t MatchedLength(const std::vector<std::string>& a, std::size_t alo, std::size_t ahi,
                           const std::vector<std::string>& b, std::size_t blo, std::size_t bhi) {
  std::size_t best_i = alo, best_j = blo, best_k = 0;
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      std::size_t k = 0;
      while (i + k < ahi && j + k < bhi && a[i + k] == b[j + k]) ++k;
      if (k > best_k) {
        best_i = i;
        best_j = j;
        best_k = k;
      }
    }
  }
  if (best_k == 0) return 0;
  return static_cast<std::int64_t>(best_k) + MatchedLength(a, alo, best_i, b, blo, best_j) +
         MatchedLength(a, best_i + best_k, ahi, b, best_j + best_k, bhi);
}

}  // namespace

boost::rational<std::int64_t> BruteForceRatio(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto total = static_cast<std::int64_t>(a.size() + b.size());
  if (total == 0) return 1;
  return {2 * MatchedLength(a, 0, a.size(), b, 0, b.size()), total};
}

std::array<int, 7> ScaleByStepPattern(int tonic, bool minor) {
  static constexpr std::array<int, 7> kMajorSteps = {2, 2, 1, 2, 2, 2, 1};
  static constexpr std::array<int, 7> kMinorSteps = {2, 1, 2, 2, 1, 2, 2};
  const auto& steps = minor ? kMinorSteps : kMajorSteps;
  std::array<int, 7> out{};
  int pc = tonic;
  for (int i = 0; i < 7; ++i) {
    out[static_cast<std::size_t>(i)] = pc % 12;
    pc += steps[static_cast<std::size_t>(i)];
  }
  return out;
}

std::vector<int> StackedThirds(const std::array<int, 7>& scale, int index, int size) {
  std::vector<int> out;
  for (int n = 0; n < size; ++n) out.push_back(scale[static_cast<std::size_t>((index + 2 * n) % 7)]);
  return out;
}

int PitchClassOf(const std::string& name) {
  static constexpr int kLetters[] = {9, 11, 0, 2, 4, 5, 7};  // A..G
  if (name.empty() || name[0] < 'A' || name[0] > 'G') throw std::invalid_argument("bad note name " + name);
  int pc = kLetters[name[0] - 'A'];
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (name[i] == '#') {
      ++pc;
    } else if (name[i] == 'b') {
      --pc;
    } else {
      break;
    }
  }
  return ((pc % 12) + 12) % 12;
}

int NoteNameToMidi(const std::string& name) {
  static constexpr int kLetters[] = {9, 11, 0, 2, 4, 5, 7};
  int semis = kLetters[name.at(0) - 'A'];
  std::size_t i = 1;
  for (; i < name.size() && (name[i] == '#' || name[i] == 'b'); ++i) semis += name[i] == '#' ? 1 : -1;
  int octave = std::stoi(name.substr(i));
  return 12 * (octave + 1) + semis;
}

std::vector<int> IntervalsForSuffix(const std::string& suffix) {
  if (suffix.empty()) return {0, 4, 7};
  if (suffix == "m") return {0, 3, 7};
  if (suffix == "dim") return {0, 3, 6};
  if (suffix == "aug4") return {0, 4, 6};
  if (suffix == "maj7") return {0, 4, 7, 11};
  if (suffix == "m7") return {0, 3, 7, 10};
  if (suffix == "7") return {0, 4, 7, 10};
  throw std::invalid_argument("unknown chord suffix '" + suffix + "'");
}

std::vector<int> ChordNameTones(const std::string& name) {
  std::size_t used = 1;
  while (used < name.size() && (name[used] == '#' || name[used] == 'b')) ++used;
  int root = PitchClassOf(name.substr(0, used));
  std::vector<int> out;
  for (int iv : IntervalsForSuffix(name.substr(used))) out.push_back((root + iv) % 12);
  return out;
}

}  // namespace cadenza::testing
