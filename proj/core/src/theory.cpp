#include "cadenza/theory.h"

#include <algorithm>
#include <cctype>

#include "cadenza/errors.h"

namespace cadenza {

namespace {

constexpr std::array<int, 7> kMajorSteps = {0, 2, 4, 5, 7, 9, 11};
constexpr std::array<int, 7> kMinorSteps = {0, 2, 3, 5, 7, 8, 10};

// Natural pitch class of letters C D E F G A B.
constexpr std::array<int, 7> kLetterPc = {0, 2, 4, 5, 7, 9, 11};
constexpr std::string_view kLetters = "CDEFGAB";

constexpr std::array<std::string_view, 12> kDefaultNames = {
    "C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"};
constexpr std::array<std::string_view, 12> kSharpNames = {
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};
constexpr std::array<std::string_view, 12> kFlatNames = {
    "C", "Db", "D", "Eb", "E", "F", "Gb", "G", "Ab", "A", "Bb", "B"};

constexpr std::array<std::string_view, 12> kMajorTonicNames = {
    "C", "Db", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"};
constexpr std::array<std::string_view, 12> kMinorTonicNames = {
    "C", "C#", "D", "Eb", "E", "F", "F#", "G", "G#", "A", "Bb", "B"};

constexpr std::array<std::string_view, 7> kRomans = {"I", "II", "III", "IV",
                                                     "V", "VI", "VII"};

[[noreturn]] void ThrowParse(std::string_view what, std::string_view text) {
  throw Error(ErrorCode::kParseError,
              std::string(what) + ": '" + std::string(text) + "'");
}

int LetterIndex(char c) {
  auto pos = kLetters.find(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

// Signed semitone difference folded into [-6, 5].
int FoldAccidental(int diff) {
  int d = Pc(diff);
  return d > 6 ? d - 12 : d;
}

std::string LetterWithAccidental(int letter, int accidental) {
  std::string out(1, kLetters[letter]);
  if (accidental > 0) out.append(accidental, '#');
  if (accidental < 0) out.append(-accidental, 'b');
  return out;
}

// Parses a note name prefix; returns {pc, consumed chars}.
std::pair<PitchClass, size_t> ParseNoteName(std::string_view text) {
  if (text.empty()) ThrowParse("empty note name", text);
  int letter = LetterIndex(text[0]);
  if (letter < 0 || !std::isupper(static_cast<unsigned char>(text[0]))) {
    ThrowParse("bad note letter", text);
  }
  int pc = kLetterPc[letter];
  size_t i = 1;
  while (i < text.size() && (text[i] == '#' || text[i] == 'b')) {
    pc += text[i] == '#' ? 1 : -1;
    ++i;
  }
  return {Pc(pc), i};
}

std::string_view QualitySuffix(ChordQuality q) {
  switch (q) {
    case ChordQuality::kMajor: return "";
    case ChordQuality::kMinor: return "m";
    case ChordQuality::kDiminished: return "dim";
    case ChordQuality::kAugmented4: return "aug4";
    case ChordQuality::kMajor7: return "maj7";
    case ChordQuality::kMinor7: return "m7";
    case ChordQuality::kDominant7: return "7";
  }
  return "";
}

bool LowerCaseQuality(ChordQuality q) {
  return q == ChordQuality::kMinor || q == ChordQuality::kDiminished ||
         q == ChordQuality::kMinor7;
}

std::optional<ChordQuality> QualityFromIntervals(const std::vector<int>& intervals) {
  for (ChordQuality q : kAllQualities) {
    if (QualityIntervals(q) == intervals) return q;
  }
  return std::nullopt;
}

std::optional<ChordSymbol> StackedChord(const Key& key, int degree_index, int size) {
  auto scale = DiatonicScale(key);
  auto raised = RaisedSeventh(key);
  // In minor only the dominant takes the raised seventh; vii stays on the natural one.
  bool use_raised = raised && degree_index == 4;
  std::vector<PitchClass> pcs;
  for (int k = 0; k < size; ++k) {
    int idx = (degree_index + 2 * k) % 7;
    PitchClass pc = scale[idx];
    if (use_raised && idx == 6) pc = *raised;
    pcs.push_back(pc);
  }
  std::vector<int> intervals;
  for (PitchClass pc : pcs) intervals.push_back(Pc(pc - pcs[0]));
  auto quality = QualityFromIntervals(intervals);
  if (!quality) return std::nullopt;
  return ChordSymbol(pcs[0], *quality, SpellPitchClass(pcs[0], key));
}

}  // namespace

// ---------------------------------------------------------------------------
// Keys
// ---------------------------------------------------------------------------

Key Key::FromCanonicalIndex(int index) {
  return Key{Pc(index % 12), index < 12 ? Mode::kMajor : Mode::kMinor};
}

std::string Key::TonicName() const {
  return std::string(mode == Mode::kMajor ? kMajorTonicNames[tonic]
                                          : kMinorTonicNames[tonic]);
}

std::string Key::Name() const {
  return TonicName() + (mode == Mode::kMajor ? " major" : " minor");
}

std::array<Key, 24> AllKeys() {
  std::array<Key, 24> keys;
  for (int i = 0; i < 24; ++i) keys[i] = Key::FromCanonicalIndex(i);
  return keys;
}

Key ParseKey(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) ThrowParse("empty key", text);
  std::string upper(text);
  upper[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(upper[0])));
  auto [pc, used] = ParseNoteName(upper);
  std::string rest(upper.substr(used));
  rest.erase(std::remove(rest.begin(), rest.end(), ' '), rest.end());
  std::transform(rest.begin(), rest.end(), rest.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (rest.empty() || rest == "major" || rest == "maj") return Key{pc, Mode::kMajor};
  if (rest == "m" || rest == "minor" || rest == "min") return Key{pc, Mode::kMinor};
  ThrowParse("bad key mode", text);
}

// ---------------------------------------------------------------------------
// Chords
// ---------------------------------------------------------------------------

bool IsSeventh(ChordQuality quality) {
  return quality == ChordQuality::kMajor7 || quality == ChordQuality::kMinor7 ||
         quality == ChordQuality::kDominant7;
}

std::vector<int> QualityIntervals(ChordQuality quality) {
  switch (quality) {
    case ChordQuality::kMajor: return {0, 4, 7};
    case ChordQuality::kMinor: return {0, 3, 7};
    case ChordQuality::kDiminished: return {0, 3, 6};
    case ChordQuality::kAugmented4: return {0, 4, 6};
    case ChordQuality::kMajor7: return {0, 4, 7, 11};
    case ChordQuality::kMinor7: return {0, 3, 7, 10};
    case ChordQuality::kDominant7: return {0, 4, 7, 10};
  }
  return {0};
}

std::string_view QualityName(ChordQuality quality) {
  switch (quality) {
    case ChordQuality::kMajor: return "major";
    case ChordQuality::kMinor: return "minor";
    case ChordQuality::kDiminished: return "diminished";
    case ChordQuality::kAugmented4: return "augmented-fourth";
    case ChordQuality::kMajor7: return "major seventh";
    case ChordQuality::kMinor7: return "minor seventh";
    case ChordQuality::kDominant7: return "dominant seventh";
  }
  return "";
}

std::string ChordSymbol::Display() const {
  std::string name = root_name.empty() ? std::string(kDefaultNames[root]) : root_name;
  return name + std::string(QualitySuffix(quality));
}

ChordSymbol ParseChord(std::string_view text) {
  auto [pc, used] = ParseNoteName(text);
  std::string_view suffix = text.substr(used);
  for (ChordQuality q : kAllQualities) {
    if (suffix == QualitySuffix(q)) {
      return ChordSymbol(pc, q, std::string(text.substr(0, used)));
    }
  }
  ThrowParse("bad chord suffix", text);
}

std::vector<PitchClass> ChordTones(const ChordSymbol& chord) {
  std::vector<PitchClass> tones;
  for (int iv : QualityIntervals(chord.quality)) tones.push_back(Pc(chord.root + iv));
  return tones;
}

std::vector<PitchClass> TriadTones(const ChordSymbol& chord) {
  auto tones = ChordTones(chord);
  tones.resize(3);
  return tones;
}

bool IsChordTone(const ChordSymbol& chord, PitchClass pc) {
  auto tones = ChordTones(chord);
  return std::find(tones.begin(), tones.end(), Pc(pc)) != tones.end();
}

// ---------------------------------------------------------------------------
// Degrees
// ---------------------------------------------------------------------------

std::string DegreeSymbol::Display() const {
  if (degree == 1 && !flat && quality == ChordQuality::kAugmented4) return "aug4";
  std::string roman(kRomans[std::clamp(degree, 1, 7) - 1]);
  if (LowerCaseQuality(quality)) {
    std::transform(roman.begin(), roman.end(), roman.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  std::string out = flat ? "b" : "";
  out += roman;
  switch (quality) {
    case ChordQuality::kMajor:
    case ChordQuality::kMinor: break;
    case ChordQuality::kDiminished: out += "dim"; break;
    case ChordQuality::kAugmented4: out += "aug4"; break;
    case ChordQuality::kMajor7: out += "maj7"; break;
    case ChordQuality::kMinor7:
    case ChordQuality::kDominant7: out += "7"; break;
  }
  return out;
}

DegreeSymbol ParseDegree(std::string_view text) {
  if (text == "aug4") return DegreeSymbol{1, ChordQuality::kAugmented4, false};
  std::string_view rest = text;
  DegreeSymbol out;
  if (!rest.empty() && rest.front() == 'b') {
    out.flat = true;
    rest.remove_prefix(1);
  }
  size_t n = 0;
  while (n < rest.size() && std::string_view("IViv").find(rest[n]) != std::string_view::npos) ++n;
  if (n == 0) ThrowParse("missing roman numeral", text);
  std::string numeral(rest.substr(0, n));
  bool all_upper = std::all_of(numeral.begin(), numeral.end(),
                               [](char c) { return std::isupper(static_cast<unsigned char>(c)); });
  bool all_lower = std::all_of(numeral.begin(), numeral.end(),
                               [](char c) { return std::islower(static_cast<unsigned char>(c)); });
  if (!all_upper && !all_lower) ThrowParse("mixed-case numeral", text);
  std::string upper = numeral;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  auto it = std::find(kRomans.begin(), kRomans.end(), upper);
  if (it == kRomans.end()) ThrowParse("unknown numeral", text);
  out.degree = static_cast<int>(it - kRomans.begin()) + 1;

  std::string_view suffix = rest.substr(n);
  if (suffix.empty()) {
    out.quality = all_upper ? ChordQuality::kMajor : ChordQuality::kMinor;
  } else if (suffix == "7") {
    out.quality = all_upper ? ChordQuality::kDominant7 : ChordQuality::kMinor7;
  } else if (suffix == "maj7" && all_upper) {
    out.quality = ChordQuality::kMajor7;
  } else if (suffix == "aug4" && all_upper) {
    out.quality = ChordQuality::kAugmented4;
  } else if ((suffix == "dim" || suffix == "°" || suffix == "o") && all_lower) {
    out.quality = ChordQuality::kDiminished;
  } else {
    ThrowParse("bad degree suffix", text);
  }
  return out;
}

std::vector<DegreeSymbol> ParseDegreeSequence(std::string_view text) {
  // Normalise the en dash (U+2013) and its spaced variants to a single space.
  std::string normalised;
  for (size_t i = 0; i < text.size(); ++i) {
    if (text.substr(i, 3) == "–") {
      normalised += ' ';
      i += 2;
    } else if (text[i] == '-' || text[i] == ',' || text[i] == '[' || text[i] == ']') {
      normalised += ' ';
    } else {
      normalised += text[i];
    }
  }
  std::vector<DegreeSymbol> out;
  size_t pos = 0;
  while (pos < normalised.size()) {
    while (pos < normalised.size() && std::isspace(static_cast<unsigned char>(normalised[pos]))) ++pos;
    size_t end = pos;
    while (end < normalised.size() && !std::isspace(static_cast<unsigned char>(normalised[end]))) ++end;
    if (end > pos) out.push_back(ParseDegree(std::string_view(normalised).substr(pos, end - pos)));
    pos = end;
  }
  return out;
}

std::string JoinDegrees(const std::vector<DegreeSymbol>& degrees, std::string_view separator) {
  std::string out;
  for (size_t i = 0; i < degrees.size(); ++i) {
    if (i) out += separator;
    out += degrees[i].Display();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scales and spelling
// ---------------------------------------------------------------------------

std::array<PitchClass, 7> DiatonicScale(const Key& key) {
  const auto& steps = key.mode == Mode::kMajor ? kMajorSteps : kMinorSteps;
  std::array<PitchClass, 7> out;
  for (int i = 0; i < 7; ++i) out[i] = Pc(key.tonic + steps[i]);
  return out;
}

std::optional<PitchClass> RaisedSeventh(const Key& key) {
  if (key.mode == Mode::kMajor) return std::nullopt;
  return Pc(key.tonic + 11);
}

std::vector<PitchClass> ExtendedScale(const Key& key) {
  auto scale = DiatonicScale(key);
  std::vector<PitchClass> out(scale.begin(), scale.end());
  if (auto raised = RaisedSeventh(key)) out.push_back(*raised);
  return out;
}

bool InExtendedScale(const Key& key, PitchClass pc) {
  auto ext = ExtendedScale(key);
  return std::find(ext.begin(), ext.end(), Pc(pc)) != ext.end();
}

std::array<std::string, 7> SpelledScale(const Key& key) {
  int tonic_letter = LetterIndex(key.TonicName()[0]);
  auto scale = DiatonicScale(key);
  std::array<std::string, 7> out;
  for (int i = 0; i < 7; ++i) {
    int letter = (tonic_letter + i) % 7;
    out[i] = LetterWithAccidental(letter, FoldAccidental(scale[i] - kLetterPc[letter]));
  }
  return out;
}

bool IsSharpSide(const Key& key) {
  Key major = key.mode == Mode::kMajor ? key : Key{Pc(key.tonic + 3), Mode::kMajor};
  int total = 0;
  for (const auto& name : SpelledScale(major)) {
    for (char c : name.substr(1)) total += c == '#' ? 1 : -1;
  }
  return total >= 0;
}

std::string SpellPitchClass(PitchClass pc, const Key& key) {
  pc = Pc(pc);
  auto scale = DiatonicScale(key);
  auto spelled = SpelledScale(key);
  for (int i = 0; i < 7; ++i) {
    if (scale[i] == pc) return spelled[i];
  }
  if (auto raised = RaisedSeventh(key); raised && *raised == pc) {
    int letter = LetterIndex(spelled[6][0]);
    int acc = FoldAccidental(pc - kLetterPc[letter]);
    if (acc >= -1 && acc <= 1) return LetterWithAccidental(letter, acc);
  }
  return std::string(IsSharpSide(key) ? kSharpNames[pc] : kFlatNames[pc]);
}

std::string SpellMidi(int midi, const Key& key) {
  std::string name = SpellPitchClass(Pc(midi), key);
  int letter = LetterIndex(name[0]);
  int acc = 0;
  for (char c : name.substr(1)) acc += c == '#' ? 1 : -1;
  // The octave follows the letter: B#3 sounds as C4, Cb5 as B4.
  int natural_midi = midi - acc;
  int octave = (natural_midi - kLetterPc[letter]) / 12 - 1;
  return name + std::to_string(octave);
}

// ---------------------------------------------------------------------------
// Degree <-> chord
// ---------------------------------------------------------------------------

std::vector<std::pair<DegreeSymbol, ChordSymbol>> DiatonicTriads(const Key& key) {
  std::vector<std::pair<DegreeSymbol, ChordSymbol>> out;
  for (int i = 0; i < 7; ++i) {
    ChordSymbol chord = *StackedChord(key, i, 3);
    out.emplace_back(DegreeSymbol{i + 1, chord.quality, false}, chord);
  }
  return out;
}

std::optional<std::pair<DegreeSymbol, ChordSymbol>> DiatonicSeventh(const Key& key, int degree) {
  if (degree < 1 || degree > 7) return std::nullopt;
  auto chord = StackedChord(key, degree - 1, 4);
  if (!chord) return std::nullopt;
  return std::make_pair(DegreeSymbol{degree, chord->quality, false}, *chord);
}

ChordSymbol DegreeToChord(const DegreeSymbol& degree, const Key& key) {
  int index = std::clamp(degree.degree, 1, 7) - 1;
  auto scale = DiatonicScale(key);
  auto spelled = SpelledScale(key);
  PitchClass root = scale[index];
  int letter = LetterIndex(spelled[index][0]);
  if (degree.flat) {
    root = Pc(root - 1);
  } else if (key.mode == Mode::kMinor && index == 6 &&
             degree.quality == ChordQuality::kDiminished) {
    root = *RaisedSeventh(key);
  }
  int acc = FoldAccidental(root - kLetterPc[letter]);
  std::string name = (acc >= -1 && acc <= 1)
                         ? LetterWithAccidental(letter, acc)
                         : std::string(IsSharpSide(key) ? kSharpNames[root] : kFlatNames[root]);
  return ChordSymbol(root, degree.quality, name);
}

DegreeSymbol ChordToDegree(const ChordSymbol& chord, const Key& key) {
  auto scale = DiatonicScale(key);
  for (int i = 0; i < 7; ++i) {
    if (scale[i] == chord.root) return DegreeSymbol{i + 1, chord.quality, false};
  }
  if (auto raised = RaisedSeventh(key); raised && *raised == chord.root) {
    return DegreeSymbol{7, chord.quality, false};
  }
  if (Pc(scale[1] - 1) == chord.root) return DegreeSymbol{2, chord.quality, true};
  throw Error(ErrorCode::kNonDiatonicChord,
              chord.Display() + " is not diatonic to " + key.Name());
}

std::string_view HarmonicFunction(const DegreeSymbol& degree) {
  if (degree.flat) return "subdominant";
  switch (degree.degree) {
    case 1:
    case 3:
    case 6: return "tonic";
    case 2:
    case 4: return "subdominant";
    default: return "dominant";
  }
}

}  // namespace cadenza
