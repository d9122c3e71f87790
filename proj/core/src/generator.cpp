#include "cadenza/generator.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "cadenza/errors.h"

namespace cadenza {

namespace {

constexpr int kDefaultPreviousPitch = 72;

int CircularDistance(PitchClass a, PitchClass b) {
  int d = std::abs(a - b) % 12;
  return std::min(d, 12 - d);
}

int DistanceToChord(int midi, const ChordSymbol& chord) {
  int best = 12;
  for (PitchClass pc : ChordTones(chord)) best = std::min(best, CircularDistance(Pc(midi), pc));
  return best;
}

std::size_t CommonTones(const ChordSymbol& a, const ChordSymbol& b) {
  auto ta = ChordTones(a);
  auto tb = ChordTones(b);
  return static_cast<std::size_t>(std::count_if(ta.begin(), ta.end(), [&](PitchClass pc) {
    return std::find(tb.begin(), tb.end(), pc) != tb.end();
  }));
}

std::vector<int> SubstitutionPartners(int degree) {
  switch (degree) {
    case 1: return {6, 3};
    case 3: return {1};
    case 6: return {1};
    case 4: return {2};
    case 2: return {4};
    case 5: return {7};
    case 7: return {5};
  }
  return {};
}

std::optional<int> LastSoundedPitch(const Part& part, int before_measure) {
  for (int m = std::min<int>(before_measure, static_cast<int>(part.measures.size())) - 1; m >= 0; --m) {
    const auto& events = part.measures[m].events;
    for (auto it = events.rbegin(); it != events.rend(); ++it) {
      if (it->is_note()) return it->pitch->midi;
    }
  }
  return std::nullopt;
}

int CountOrnaments(const Measure& m) {
  return static_cast<int>(std::count_if(m.events.begin(), m.events.end(),
                                         [](const NoteEvent& e) { return e.ornament.has_value(); }));
}

int CountSounded(const std::vector<Measure*>& measures) {
  int n = 0;
  for (const Measure* m : measures) {
    n += static_cast<int>(std::count_if(m->events.begin(), m->events.end(),
                                        [](const NoteEvent& e) { return e.is_note(); }));
  }
  return n;
}

Measure LeftHandMeasure(const ChordSymbol& chord, int low) {
  Measure m;
  for (int midi : LeftHandVoicing(chord, low)) m.events.push_back(NoteEvent::Note(midi, 0, kMeasureLength));
  m.chord = chord;
  return m;
}

}  // namespace

void GenerationConfig::Validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (!(substitution_probability >= 0 && substitution_probability <= 1)) {
    bad("substitution_probability must be in [0, 1]");
  }
  if (!(ornament_rate >= 0 && ornament_rate <= 1)) bad("ornament_rate must be in [0, 1]");
  if (right_hand_low < 0 || right_hand_high > 127 || left_hand_low < 0 || left_hand_high > 127) {
    bad("registers must lie in 0-127");
  }
  if (right_hand_low + 12 > right_hand_high || left_hand_low + 12 > left_hand_high) {
    bad("each register must span at least an octave");
  }
  if (left_hand_high >= right_hand_low) bad("left- and right-hand registers overlap");
}

MelodyAnalysis AnalyzeMelody(const Score& melody, const CorpusDb& db) {
  MelodyAnalysis out;
  out.ranking = DetectScale(melody);
  out.key = out.ranking.best();
  out.chords = DetectChords(melody, out.key);
  for (const auto& c : out.chords) {
    if (c) out.degrees.push_back(ChordToDegree(*c, out.key));
  }
  RhythmFit fit = FitRhythm(melody.parts.front().measures.front(), db);
  out.fitted_rhythm = fit.pattern->id;
  out.fit_distance = fit.distance;
  return out;
}

Recommendation RecommendProgression(const std::vector<DegreeSymbol>& context, const Key& key,
                                    const CorpusDb& db, std::size_t click_index,
                                    const std::vector<std::string>& used_ids) {
  auto ranked = RankProgressions(context, db, key.mode);
  if (click_index >= ranked.size()) {
    throw Error(ErrorCode::kCorpusExhausted,
                "all " + std::to_string(ranked.size()) + " progressions for " + key.Name() +
                    " have been used");
  }
  std::size_t skip = click_index > used_ids.size() ? click_index - used_ids.size() : 0;
  for (const auto& r : ranked) {
    if (std::find(used_ids.begin(), used_ids.end(), r.entry->id) != used_ids.end()) continue;
    if (skip > 0) {
      --skip;
      continue;
    }
    return {r.entry, r.ratio};
  }
  throw Error(ErrorCode::kCorpusExhausted, "no unused progression left for " + key.Name());
}

std::vector<DegreeSymbol> SubstitutionCandidates(const DegreeSymbol& degree, const Key& key) {
  std::vector<DegreeSymbol> out;
  if (degree.flat) return out;
  const ChordSymbol original = DegreeToChord(degree, key);
  const auto triads = DiatonicTriads(key);
  for (int partner : SubstitutionPartners(degree.degree)) {
    DegreeSymbol candidate = triads[partner - 1].first;
    if (IsSeventh(degree.quality)) {
      if (auto seventh = DiatonicSeventh(key, partner)) candidate = seventh->first;
    }
    if (CommonTones(original, DegreeToChord(candidate, key)) >= 2) out.push_back(candidate);
  }
  return out;
}

Substitution ApplySubstitution(const std::vector<DegreeSymbol>& progression, const Key& key, Rng& rng,
                               double p) {
  Substitution out{progression, std::vector<bool>(progression.size(), false)};
  for (std::size_t i = 1; i + 1 < progression.size(); ++i) {
    if (!rng.Chance(p)) continue;
    auto candidates = SubstitutionCandidates(progression[i], key);
    if (candidates.empty()) continue;
    std::size_t pick = candidates.size() == 1 ? 0 : static_cast<std::size_t>(rng.Below(candidates.size()));
    out.progression[i] = candidates[pick];
    out.substituted[i] = true;
  }
  return out;
}

std::vector<int> PlanRhythms(int fitted_id, const CorpusDb& db, Rng& rng, int phrase_len) {
  std::vector<int> others;
  for (const auto& r : db.rhythms) {
    if (r.id != fitted_id) others.push_back(r.id);
  }
  std::vector<int> plan = {fitted_id};
  if (phrase_len <= 1) return plan;
  auto picks = rng.SampleWithoutReplacement(others.size(), 2);
  std::vector<int> alternates;
  for (auto i : picks) alternates.push_back(others[i]);
  if (alternates.empty()) alternates.push_back(fitted_id);
  for (int m = 1; m < phrase_len; ++m) plan.push_back(alternates[(m - 1) % alternates.size()]);
  return plan;
}

std::vector<int> LeftHandVoicing(const ChordSymbol& chord, int low) {
  int root = low + Pc(chord.root - low);
  std::vector<int> out;
  auto intervals = QualityIntervals(chord.quality);
  for (std::size_t i = 0; i < 3 && i < intervals.size(); ++i) out.push_back(root + intervals[i]);
  return out;
}

Part RealizeLeftHand(const std::vector<ChordSymbol>& chords, const GenerationConfig& config) {
  Part part;
  part.role = HandRole::kLeftHand;
  for (const auto& chord : chords) {
    Measure m = LeftHandMeasure(chord, config.left_hand_low);
    m.index = static_cast<int>(part.measures.size());
    m.source = MeasureSource::kGenerated;
    part.measures.push_back(std::move(m));
  }
  return part;
}

int SnapToScale(int midi, const Key& key) {
  for (int d = 0; d <= 6; ++d) {
    if (InExtendedScale(key, Pc(midi + d))) return midi + d;
    if (InExtendedScale(key, Pc(midi - d))) return midi - d;
  }
  return midi;
}

int StrongBeatPitch(const ChordSymbol& chord, const Key& key, int previous, int low, int high) {
  const int from = SnapToScale(std::clamp(previous, low, high), key);
  std::optional<int> best;
  for (int m = low; m <= high; ++m) {
    if (!IsChordTone(chord, Pc(m)) || !InExtendedScale(key, Pc(m))) continue;
    if (!best || std::abs(m - from) < std::abs(*best - from)) best = m;
  }
  return best.value_or(std::clamp(from, low, high));
}

int StepPitch(const Key& key, int previous, bool up, int low, int high) {
  const int from = SnapToScale(std::clamp(previous, low, high), key);
  int next = up ? UpperNeighbor(from, key) : LowerNeighbor(from, key);
  if (next > high || next < low) next = up ? LowerNeighbor(from, key) : UpperNeighbor(from, key);
  return next;
}

Measure RealizeRightHandMeasure(const ChordSymbol& chord, const Key& key, const RhythmPattern& rhythm,
                                Rng& rng, int& previous, const GenerationConfig& config) {
  Measure m;
  m.chord = chord;
  Beats t{0};
  for (const auto& e : rhythm.events) {
    if (e.kind == EventKind::kRest) {
      m.events.push_back(NoteEvent::Rest(t, e.duration));
    } else {
      int pitch;
      if (t == 0 || t == 2) {
        pitch = StrongBeatPitch(chord, key, previous, config.right_hand_low, config.right_hand_high);
      } else {
        bool up = rng.Below(2) == 1;
        pitch = StepPitch(key, previous, up, config.right_hand_low, config.right_hand_high);
      }
      m.events.push_back(NoteEvent::Note(pitch, t, e.duration));
      previous = pitch;
    }
    t += e.duration;
  }
  return m;
}

Part RealizeRightHand(const std::vector<ChordSymbol>& chords, const Key& key,
                      const std::vector<int>& rhythm_plan, const CorpusDb& db, Rng& rng, int& previous,
                      const GenerationConfig& config) {
  if (rhythm_plan.size() < chords.size()) {
    throw Error(ErrorCode::kInvalidArgument, "rhythm plan shorter than the chord list");
  }
  Part part;
  part.role = HandRole::kRightHand;
  for (std::size_t i = 0; i < chords.size(); ++i) {
    Measure m = RealizeRightHandMeasure(chords[i], key, db.Rhythm(rhythm_plan[i]), rng, previous, config);
    m.index = static_cast<int>(i);
    m.source = MeasureSource::kGenerated;
    part.measures.push_back(std::move(m));
  }
  return part;
}

int OrnamentCount(double rate, int sounded_notes) {
  return static_cast<int>(std::floor(rate * sounded_notes + 0.5 + 1e-9));
}

std::optional<OrnamentTag> ChooseOrnament(const NoteEvent& note, const ChordSymbol& chord, const Key& key) {
  if (!note.is_note()) return std::nullopt;
  const int main = note.pitch->midi;
  std::optional<OrnamentTag> upper, lower;
  OrnamentKind upper_kind = note.duration >= 1 ? OrnamentKind::kTrill : OrnamentKind::kAppoggiatura;
  if (OrnamentFits(upper_kind, note.duration)) upper = OrnamentTag{upper_kind, Pitch{UpperNeighbor(main, key)}};
  if (OrnamentFits(OrnamentKind::kMordent, note.duration)) {
    lower = OrnamentTag{OrnamentKind::kMordent, Pitch{LowerNeighbor(main, key)}};
  }
  if (upper && lower) {
    return DistanceToChord(lower->auxiliary.midi, chord) < DistanceToChord(upper->auxiliary.midi, chord)
               ? lower
               : upper;
  }
  return upper ? upper : lower;
}

int AddOrnaments(std::vector<Measure*> measures, const Key& key, Rng& rng, int count) {
  struct Slot {
    NoteEvent* note;
    OrnamentTag tag;
  };
  std::vector<Slot> eligible;
  for (Measure* m : measures) {
    if (!m->chord) continue;
    for (auto& e : m->events) {
      if (auto tag = ChooseOrnament(e, *m->chord, key)) eligible.push_back({&e, *tag});
    }
  }
  auto picks = rng.SampleWithoutReplacement(eligible.size(), static_cast<std::size_t>(std::max(count, 0)));
  for (auto i : picks) eligible[i].note->ornament = eligible[i].tag;
  return static_cast<int>(picks.size());
}

std::vector<std::string> Piece::used_progressions() const {
  std::vector<std::string> out;
  for (const auto& p : phrases) out.push_back(p.progression_id);
  return out;
}

std::optional<std::size_t> Piece::PhraseOf(int measure) const {
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    if (measure >= phrases[i].first_measure && measure <= phrases[i].last_measure()) return i;
  }
  return std::nullopt;
}

Piece StartPiece(const Score& melody, const MelodyAnalysis& analysis) {
  Piece piece;
  piece.analysis = analysis;
  piece.score.bpm = melody.bpm;
  piece.score.key = analysis.key;
  Part right = melody.parts.front();
  right.role = HandRole::kRightHand;
  Part left;
  left.role = HandRole::kLeftHand;
  for (std::size_t i = 0; i < right.measures.size(); ++i) {
    auto& m = right.measures[i];
    m.index = static_cast<int>(i);
    m.source = MeasureSource::kInput;
    m.chord = i < analysis.chords.size() ? analysis.chords[i] : std::nullopt;
    Measure rest;
    rest.index = m.index;
    rest.chord = m.chord;
    rest.source = MeasureSource::kInput;
    rest.events.push_back(NoteEvent::Rest(0, kMeasureLength));
    left.measures.push_back(std::move(rest));
  }
  piece.input_measures = static_cast<int>(right.measures.size());
  piece.score.parts = {std::move(right), std::move(left)};
  piece.context = analysis.degrees;
  return piece;
}

const Phrase& ContinuePiece(Piece& piece, const CorpusDb& db, const GenerationConfig& config) {
  if (piece.ended) throw Error(ErrorCode::kIllegalState, "the piece has ended");
  const Key key = piece.analysis.key;
  const std::size_t k = piece.phrases.size();
  Rng rng = Rng::ForStream(config.seed, k);

  Recommendation rec = RecommendProgression(piece.context, key, db, k, piece.used_progressions());
  Substitution sub = ApplySubstitution(rec.entry->degrees, key, rng, config.substitution_probability);

  Phrase phrase;
  phrase.progression_id = rec.entry->id;
  phrase.similarity = rec.ratio;
  phrase.recommended = rec.entry->degrees;
  phrase.progression = sub.progression;
  phrase.substituted = sub.substituted;
  for (const auto& d : phrase.progression) phrase.chords.push_back(DegreeToChord(d, key));
  phrase.first_measure = static_cast<int>(piece.score.measure_count());
  phrase.rhythm_plan = PlanRhythms(piece.analysis.fitted_rhythm, db, rng, phrase.measure_count());

  Part& right = piece.score.parts[0];
  Part& left = piece.score.parts[1];
  int previous = LastSoundedPitch(right, phrase.first_measure).value_or(kDefaultPreviousPitch);
  Part rh = RealizeRightHand(phrase.chords, key, phrase.rhythm_plan, db, rng, previous, config);
  Part lh = RealizeLeftHand(phrase.chords, config);
  for (int i = 0; i < phrase.measure_count(); ++i) {
    rh.measures[i].index = lh.measures[i].index = phrase.first_measure + i;
    right.measures.push_back(std::move(rh.measures[i]));
    left.measures.push_back(std::move(lh.measures[i]));
  }

  std::vector<Measure*> generated;
  for (int i = phrase.first_measure; i <= phrase.last_measure(); ++i) generated.push_back(&right.measures[i]);
  AddOrnaments(generated, key, rng, OrnamentCount(config.ornament_rate, CountSounded(generated)));

  piece.context.insert(piece.context.end(), phrase.progression.begin(), phrase.progression.end());
  piece.phrases.push_back(std::move(phrase));
  return piece.phrases.back();
}

void EndPiece(Piece& piece, const GenerationConfig& config) {
  if (piece.ended) throw Error(ErrorCode::kIllegalState, "the piece has already ended");
  const Key key = piece.analysis.key;
  DegreeSymbol tonic{1, key.mode == Mode::kMajor ? ChordQuality::kMajor : ChordQuality::kMinor, false};
  ChordSymbol chord = DegreeToChord(tonic, key);
  const int index = static_cast<int>(piece.score.measure_count());

  Measure right = LeftHandMeasure(chord, config.right_hand_low);
  Measure left = LeftHandMeasure(chord, config.left_hand_low);
  right.index = left.index = index;
  right.source = left.source = MeasureSource::kGenerated;
  piece.score.parts[0].measures.push_back(std::move(right));
  piece.score.parts[1].measures.push_back(std::move(left));
  piece.ended = true;
}

std::vector<DegreeSymbol> OfferedDegrees(const Key& key) {
  std::vector<DegreeSymbol> out;
  for (const auto& [degree, chord] : DiatonicTriads(key)) out.push_back(degree);
  out.push_back(DegreeSymbol{5, ChordQuality::kDominant7, false});
  return out;
}

void EditMeasure(Piece& piece, int measure, EditField field, const std::string& value, const CorpusDb& db,
                 const GenerationConfig& config) {
  if (measure < 0 || measure >= static_cast<int>(piece.score.measure_count())) {
    throw Error(ErrorCode::kScopeOutOfRange, "measure " + std::to_string(measure) + " does not exist");
  }
  if (measure < piece.input_measures) {
    throw Error(ErrorCode::kForbidden, "measure " + std::to_string(measure) + " belongs to the input melody");
  }
  auto phrase_index = piece.PhraseOf(measure);
  if (!phrase_index) throw Error(ErrorCode::kForbidden, "the closing cadence cannot be edited");
  Phrase& phrase = piece.phrases[*phrase_index];
  const auto pos = static_cast<std::size_t>(measure - phrase.first_measure);
  const Key key = piece.analysis.key;

  if (field == EditField::kDegree) {
    std::optional<DegreeSymbol> chosen;
    try {
      chosen = ParseDegree(value);
    } catch (const Error&) {
    }
    auto offered = OfferedDegrees(key);
    if (!chosen || std::find(offered.begin(), offered.end(), *chosen) == offered.end()) {
      throw Error(ErrorCode::kNotOffered, "'" + value + "' is not an offered degree");
    }
    phrase.progression[pos] = *chosen;
    phrase.chords[pos] = DegreeToChord(*chosen, key);
    phrase.substituted[pos] = false;
  } else {
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(value, &used);
      if (used != value.size()) id = 0;
    } catch (const std::exception&) {
      id = 0;
    }
    if (id < 1 || id > kRhythmCount) throw Error(ErrorCode::kNotOffered, "'" + value + "' is not a rhythm id");
    phrase.rhythm_plan[pos] = id;
  }
  // Context follows the edited progression so later phrases see it.
  std::vector<DegreeSymbol> context = piece.analysis.degrees;
  for (const auto& p : piece.phrases) context.insert(context.end(), p.progression.begin(), p.progression.end());
  piece.context = std::move(context);

  Measure& right = piece.score.parts[0].measures[measure];
  const int ornaments = CountOrnaments(right);
  int previous = LastSoundedPitch(piece.score.parts[0], measure).value_or(kDefaultPreviousPitch);
  Rng rng = Rng::ForStream(config.seed, kEditStream + static_cast<std::uint64_t>(measure));
  Measure rebuilt =
      RealizeRightHandMeasure(phrase.chords[pos], key, db.Rhythm(phrase.rhythm_plan[pos]), rng, previous, config);
  rebuilt.index = measure;
  rebuilt.source = MeasureSource::kEdited;
  AddOrnaments({&rebuilt}, key, rng, ornaments);
  right = std::move(rebuilt);

  Measure left = LeftHandMeasure(phrase.chords[pos], config.left_hand_low);
  left.index = measure;
  left.source = MeasureSource::kEdited;
  piece.score.parts[1].measures[measure] = std::move(left);
}

}  // namespace cadenza
