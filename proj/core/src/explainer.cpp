#include "cadenza/explainer.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "cadenza/errors.h"

namespace cadenza {

namespace {

// ---------------------------------------------------------------------------
// Small text helpers
// ---------------------------------------------------------------------------

std::string Link(std::string_view term) { return "[[" + std::string(term) + "]]"; }

std::string JoinList(const std::vector<std::string>& items, std::string_view last_sep = " and ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? std::string(last_sep) : ", ";
    out += items[i];
  }
  return out;
}

std::string Plural(int n, const std::string& noun) {
  return std::to_string(n) + " " + noun + (n == 1 ? "" : "s");
}

std::string Article(std::string_view word) {
  return std::string(std::string_view("aeiou").find(word.front()) != std::string_view::npos ? "an " : "a ") +
         std::string(word);
}

std::string BeatPosition(const Beats& onset) {
  Beats beat = onset + 1;
  if (beat.denominator() == 1) return "beat " + std::to_string(beat.numerator());
  auto whole = beat.numerator() / beat.denominator();
  return FormatBeats(beat - whole) + " of a beat after beat " + std::to_string(whole);
}

std::string MeasureRange(int first, int last) {
  if (first == last) return "measure " + std::to_string(first + 1);
  return "measures " + std::to_string(first + 1) + "-" + std::to_string(last + 1);
}

std::string NoteNames(const std::vector<PitchClass>& pcs, const Key& key) {
  std::vector<std::string> names;
  for (PitchClass pc : pcs) names.push_back(SpellPitchClass(pc, key));
  return JoinList(names);
}

// ---------------------------------------------------------------------------
// Facts about a scope
// ---------------------------------------------------------------------------

struct MeasureFacts {
  int index = 0;
  const Measure* right = nullptr;
  const Measure* left = nullptr;
  std::optional<ChordSymbol> chord;
  std::optional<DegreeSymbol> degree;
  std::optional<std::size_t> phrase;
  std::size_t position = 0;  // within the phrase
  std::optional<int> rhythm;  // generated measures
  bool input = false;
  bool cadence = false;
  bool edited = false;
};

MeasureFacts FactsFor(const Piece& piece, int m) {
  MeasureFacts f;
  f.index = m;
  f.right = &piece.score.parts[0].measures[m];
  f.left = &piece.score.parts[1].measures[m];
  f.chord = f.right->chord;
  f.edited = f.right->source == MeasureSource::kEdited;
  const Key& key = piece.analysis.key;
  if (m < piece.input_measures) {
    f.input = true;
    if (f.chord) f.degree = ChordToDegree(*f.chord, key);
  } else if (auto p = piece.PhraseOf(m)) {
    f.phrase = p;
    f.position = static_cast<std::size_t>(m - piece.phrases[*p].first_measure);
    f.degree = piece.phrases[*p].progression[f.position];
    f.rhythm = piece.phrases[*p].rhythm_plan[f.position];
  } else {
    f.cadence = true;
    if (f.chord) f.degree = ChordToDegree(*f.chord, key);
  }
  return f;
}

std::vector<const NoteEvent*> SoundedNotes(const Measure& m) {
  std::vector<const NoteEvent*> out;
  for (const auto& e : m.events) {
    if (e.is_note()) out.push_back(&e);
  }
  return out;
}

std::string QualityPhrase(ChordQuality q) {
  switch (q) {
    case ChordQuality::kMajor: return Link("major chord") + ", which sounds bright and settled";
    case ChordQuality::kMinor: return Link("minor chord") + ", which sounds softer and darker";
    case ChordQuality::kDiminished: return Link("diminished chord") + ", which sounds tense and unstable";
    case ChordQuality::kAugmented4:
      return "major chord whose fifth is replaced by an " + Link("augmented fourth") + ", a bright, floating colour";
    case ChordQuality::kMajor7:
      return "four-note " + Link("seventh chord") + " (a major triad plus a major seventh), smooth and jazzy";
    case ChordQuality::kMinor7:
      return "four-note " + Link("seventh chord") + " (a minor triad plus a minor seventh), mellow";
    case ChordQuality::kDominant7:
      return "four-note " + Link("seventh chord") + " (a major triad plus a minor seventh) that wants to move on";
  }
  return "";
}

// Counts of each note value, in descending duration order.
std::vector<std::pair<Beats, int>> ValueCounts(const std::vector<const Measure*>& measures) {
  std::vector<std::pair<Beats, int>> counts;
  for (const Measure* m : measures) {
    for (const NoteEvent* e : SoundedNotes(*m)) {
      auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == e->duration; });
      if (it == counts.end()) {
        counts.emplace_back(e->duration, 1);
      } else {
        ++it->second;
      }
    }
  }
  std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  return counts;
}

int RestCount(const std::vector<const Measure*>& measures) {
  int n = 0;
  for (const Measure* m : measures) {
    n += static_cast<int>(std::count_if(m->events.begin(), m->events.end(), [](const auto& e) { return !e.is_note(); }));
  }
  return n;
}

std::string ValueSummary(const std::vector<const Measure*>& measures) {
  std::vector<std::string> items;
  for (const auto& [value, n] : ValueCounts(measures)) {
    std::string name = NoteValueName(value);
    if (n != 1 && name.rfind("note of ", 0) == 0) {
      items.push_back(std::to_string(n) + " notes" + name.substr(4));
    } else {
      items.push_back(Plural(n, name));
    }
  }
  int rests = RestCount(measures);
  if (items.empty()) return "no notes, only " + Plural(rests, Link("rest"));
  std::string out = JoinList(items);
  if (rests > 0) out += ", with " + Plural(rests, Link("rest"));
  return out;
}

struct OrnamentInstance {
  const NoteEvent* note;
  const Measure* measure;
};

std::vector<OrnamentInstance> Ornaments(const std::vector<const Measure*>& measures) {
  std::vector<OrnamentInstance> out;
  for (const Measure* m : measures) {
    for (const auto& e : m->events) {
      if (e.ornament) out.push_back({&e, m});
    }
  }
  return out;
}

std::string OrnamentCounts(const std::vector<OrnamentInstance>& ornaments) {
  std::vector<std::string> parts;
  for (OrnamentKind kind : {OrnamentKind::kAppoggiatura, OrnamentKind::kMordent, OrnamentKind::kTrill}) {
    int n = static_cast<int>(std::count_if(ornaments.begin(), ornaments.end(),
                                           [&](const auto& o) { return o.note->ornament->kind == kind; }));
    if (n > 0) parts.push_back(Plural(n, std::string(OrnamentName(kind))));
  }
  return JoinList(parts);
}

std::string PlainOrnament(const OrnamentInstance& o, const Key& key) {
  const auto& tag = *o.note->ornament;
  std::string main = SpellMidi(o.note->pitch->midi, key);
  std::string aux = SpellMidi(tag.auxiliary.midi, key);
  std::string head = "The note " + main + " at " + BeatPosition(o.note->onset) + " of measure " +
                     std::to_string(o.measure->index + 1) + " is decorated with ";
  switch (tag.kind) {
    case OrnamentKind::kAppoggiatura:
      return head + "an " + Link("appoggiatura") + ": the melody first leans on the neighbouring note " + aux +
             " and then slides into " + main + ".";
    case OrnamentKind::kMordent:
      return head + "a " + Link("mordent") + ": a quick flick from " + main + " down to " + aux + " and back.";
    case OrnamentKind::kTrill:
      return head + "a " + Link("trill") + ": a rapid back-and-forth between " + main + " and " + aux +
             " just above it.";
  }
  return "";
}

int LargestLeap(const std::vector<const Measure*>& measures) {
  int largest = 0;
  std::optional<int> prev;
  for (const Measure* m : measures) {
    for (const NoteEvent* e : SoundedNotes(*m)) {
      if (prev) largest = std::max(largest, std::abs(e->pitch->midi - *prev));
      prev = e->pitch->midi;
    }
  }
  return largest;
}

bool AllDiatonic(const ChordSymbol& chord, const Key& key) {
  auto tones = ChordTones(chord);
  return std::all_of(tones.begin(), tones.end(), [&](PitchClass pc) { return InExtendedScale(key, pc); });
}

std::vector<std::string> OutsideNotes(const ChordSymbol& chord, const Key& key) {
  std::vector<std::string> out;
  for (PitchClass pc : ChordTones(chord)) {
    if (!InExtendedScale(key, pc)) out.push_back(SpellPitchClass(pc, key));
  }
  return out;
}

PitchClass LeadingTone(const Key& key) {
  return RaisedSeventh(key).value_or(DiatonicScale(key)[6]);
}

std::string FunctionTag(const DegreeSymbol& d) {
  return d.Display() + " (" + Link(HarmonicFunction(d)) + " function)";
}

std::string StyleOf(const CorpusDb& db, int id) { return db.Rhythm(id).style; }

std::string PatternRef(const CorpusDb& db, int id) {
  return "rhythm pattern " + std::to_string(id) + " (" + StyleOf(db, id) + ")";
}

std::vector<std::string> ChordNames(const std::vector<ChordSymbol>& chords) {
  std::vector<std::string> out;
  for (const auto& c : chords) out.push_back(c.Display());
  return out;
}

std::string Joined(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Measure scope
// ---------------------------------------------------------------------------

std::string MeasureChords(const Piece& piece, const MeasureFacts& f, Level level) {
  const Key& key = piece.analysis.key;
  std::ostringstream os;
  os << "The piece is in the " << Link("key") << " of " << key.Name() << ". ";
  if (!f.chord) {
    os << "This measure of your melody has no sounding notes, so no " << Link("chord") << " was detected for it.";
    return os.str();
  }
  const ChordSymbol& chord = *f.chord;
  const std::string name = chord.Display();
  if (level == Level::kBeginner) {
    if (f.input) {
      os << "Your melody here suggests the chord " << name << ". ";
    } else if (f.cadence) {
      os << "The piece closes on the chord " << name << ", its home chord. ";
    } else {
      os << "This measure is built on the chord " << name << ". ";
    }
    os << "A " << Link("chord") << " is a group of notes played together; " << name << " is "
       << Article(QualityPhrase(chord.quality)) << ", made of the notes " << NoteNames(ChordTones(chord), key)
       << ". ";
    auto notes = SoundedNotes(*f.right);
    int in_chord = static_cast<int>(std::count_if(notes.begin(), notes.end(), [&](const NoteEvent* e) {
      return IsChordTone(chord, e->pitch->pitch_class());
    }));
    if (!notes.empty()) {
      os << in_chord << " of the " << notes.size() << " melody notes in this measure belong to the chord";
      os << (in_chord == static_cast<int>(notes.size()) ? "." : "; the others are passing notes from the scale.");
    }
    if (!f.input) os << " The left hand holds the chord for the whole measure.";
    return os.str();
  }

  const DegreeSymbol& degree = *f.degree;
  os << "The chord " << name << " is " << Link("scale degree") << " " << degree.Display() << " ("
     << Link(HarmonicFunction(degree)) << " function). ";
  if (level == Level::kIntermediate) {
    os << "Chords are grouped by " << Link("harmonic function") << ": " << Link("tonic")
       << " chords feel at rest, " << Link("subdominant") << " chords move away, and " << Link("dominant")
       << " chords pull back home. ";
  }
  if (f.phrase) {
    const Phrase& ph = piece.phrases[*f.phrase];
    os << "It is chord " << f.position + 1 << " of phrase " << *f.phrase + 1 << ", whose "
       << Link("chord progression") << " is written as the progression \"" << JoinDegrees(ph.progression) << "\".";
    if (ph.substituted[f.position]) {
      os << " The library entry had " << ph.recommended[f.position].Display() << " here; "
         << degree.Display() << " stands in for " << ph.recommended[f.position].Display() << " as a "
         << Link("diatonic substitution") << ", because the two chords share " << Link("common tone")
         << "s.";
    }
    if (f.edited) os << " You chose this chord yourself.";
  } else if (f.input) {
    os << "Together your melody implies the progression \"" << JoinDegrees(piece.analysis.degrees) << "\".";
  } else {
    os << "It is the final " << Link("tonic") << " chord that closes the piece.";
  }

  if (level == Level::kAdvanced) {
    if (AllDiatonic(chord, key)) {
      os << " All notes of the chord " << name << " lie inside " << key.Name() << ", so no "
         << Link("secondary dominant") << " or " << Link("modal interchange") << " is involved.";
    } else {
      os << " The chord " << name << " uses notes outside " << key.Name() << " ("
         << JoinList(OutsideNotes(chord, key)) << "), a " << Link("chromatic") << " colour.";
    }
    if (IsChordTone(chord, LeadingTone(key))) {
      os << " It contains the " << Link("leading tone") << " " << SpellPitchClass(LeadingTone(key), key)
         << ", which pulls up toward the tonic.";
    }
    if (f.phrase) {
      const Phrase& ph = piece.phrases[*f.phrase];
      Cadence c = PhraseCadence(ph.progression);
      if (f.position + 1 == ph.progression.size() && c != Cadence::kNone) {
        os << " This measure completes " << Article(CadenceName(c)) << " " << Link("cadence") << ".";
      }
    }
  }
  return os.str();
}

std::string MeasureRhythm(const Piece& piece, const CorpusDb& db, const MeasureFacts& f, Level level) {
  std::ostringstream os;
  if (level == Level::kBeginner) {
    os << "Every measure has four beats (" << Link("time signature") << " 4/4; a waltz would count three). ";
    os << "Here the right hand plays " << ValueSummary({f.right}) << ".";
    if (!f.input) os << " The left hand plays a single " << Link("whole note") << " chord.";
    return os.str();
  }
  if (f.input) {
    if (f.index == 0) {
      os << "Your first measure is closest to " << PatternRef(db, piece.analysis.fitted_rhythm) << ", one of the "
         << kRhythmCount << " patterns in the " << Link("rhythm pattern") << " library (it differs in "
         << piece.analysis.fit_distance << " of 48 twelfth-beat slots). Every new phrase opens with it.";
    } else {
      os << "This measure belongs to your melody, so it keeps its own rhythm: " << ValueSummary({f.right}) << ".";
    }
  } else if (f.cadence) {
    os << "The closing measure is one " << Link("whole note") << " chord in both hands, a clear stop.";
  } else {
    const Phrase& ph = piece.phrases[*f.phrase];
    os << "This measure uses " << PatternRef(db, *f.rhythm) << ", one of the " << kRhythmCount << " "
       << Link("rhythm pattern") << "s. ";
    if (f.edited) os << "You edited this measure, so its rhythm or chord may differ from the original plan. ";
    if (f.position == 0 && *f.rhythm == piece.analysis.fitted_rhythm) {
      os << "The first measure of every phrase reuses the pattern fitted to your melody's first measure.";
    } else if (f.position == 0) {
      os << "This replaces " << PatternRef(db, piece.analysis.fitted_rhythm)
         << ", the pattern fitted to your melody, which phrases normally open with.";
    } else {
      std::vector<std::string> alternates;
      for (std::size_t i = 1; i < ph.rhythm_plan.size() && alternates.size() < 2; ++i) {
        std::string ref = PatternRef(db, ph.rhythm_plan[i]);
        if (std::find(alternates.begin(), alternates.end(), ref) == alternates.end()) alternates.push_back(ref);
      }
      os << "After the first measure, phrase " << *f.phrase + 1 << " alternates between "
         << JoinList(alternates) << ", drawn at random to add variety.";
    }
  }
  if (level == Level::kAdvanced) {
    os << (IsSyncopated(*f.right) ? " The rhythm is syncopated: notes start off the beat or the downbeat is silent ("
                                    : " The rhythm stays on the beat, with no ")
       << Link("syncopation") << (IsSyncopated(*f.right) ? ")." : ".");
    os << " The " << Link("harmonic rhythm") << " is one chord per measure.";
    auto counts = ValueCounts({f.right});
    bool triplets = std::any_of(counts.begin(), counts.end(), [](const auto& c) { return c.first.denominator() % 3 == 0; });
    if (triplets) {
      os << " Triplets split the beat in three against the left hand's steady chord, a light "
         << Link("polyrhythm") << ".";
    }
  }
  return os.str();
}

std::string MeasureEmbellishment(const Piece& piece, const MeasureFacts& f, Level level) {
  const Key& key = piece.analysis.key;
  auto ornaments = Ornaments({f.right});
  std::ostringstream os;
  if (level == Level::kBeginner) {
    os << "Extra notes that decorate the main melody are called " << Link("ornament") << "s. ";
  }
  if (ornaments.empty()) {
    os << "No decoration was added in this measure. ";
  } else {
    os << "This measure has " << OrnamentCounts(ornaments) << ". ";
    for (const auto& o : ornaments) os << PlainOrnament(o, key) << " ";
  }
  if (level == Level::kBeginner) return os.str();

  if (f.chord) {
    for (const auto& o : ornaments) {
      int aux = o.note->ornament->auxiliary.midi;
      os << "The auxiliary note " << SpellMidi(aux, key) << " is " << (IsChordTone(*f.chord, Pc(aux)) ? "" : "not ")
         << "a " << Link("chord tone") << " of " << f.chord->Display() << ". ";
    }
  }
  if (!f.input && !f.cadence && f.chord) {
    std::vector<std::string> strong;
    for (const NoteEvent* e : SoundedNotes(*f.right)) {
      if (e->onset == 0 || e->onset == 2) strong.push_back(SpellMidi(e->pitch->midi, key));
    }
    if (!strong.empty()) {
      os << "On beats 1 and 3 the melody lands on chord tones (" << JoinList(strong)
         << "); in between it moves by step through the " << Link("scale") << ", outlining the harmony like a loose "
         << Link("arpeggio") << ".";
    } else {
      os << "The melody moves by step through the " << Link("scale") << " around the chord.";
    }
  }
  if (level == Level::kAdvanced) {
    for (const auto& o : ornaments) {
      int aux = o.note->ornament->auxiliary.midi;
      if (!f.chord || IsChordTone(*f.chord, Pc(aux))) continue;
      os << " The " << OrnamentName(o.note->ornament->kind) << " on " << SpellMidi(o.note->pitch->midi, key)
         << " creates " << Link("tension and release") << ": " << SpellMidi(aux, key) << " clashes with the chord "
         << f.chord->Display()
         << (o.note->ornament->kind == OrnamentKind::kTrill ? " and keeps returning to the main note."
                                                             : " and resolves to the main note.");
    }
    int leap = LargestLeap({f.right});
    os << " For " << Link("voice leading") << ", the largest melodic interval in this scope is "
       << Plural(leap, "semitone") << ".";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Phrase scope
// ---------------------------------------------------------------------------

std::vector<const Measure*> RightMeasures(const Piece& piece, int first, int last) {
  std::vector<const Measure*> out;
  for (int m = first; m <= last; ++m) out.push_back(&piece.score.parts[0].measures[m]);
  return out;
}

std::string PhraseChords(const Piece& piece, const CorpusDb& db, std::size_t j, Level level) {
  const Key& key = piece.analysis.key;
  const Phrase& ph = piece.phrases[j];
  std::ostringstream os;
  os << "The piece is in the " << Link("key") << " of " << key.Name() << ". Phrase " << j + 1 << " covers "
     << MeasureRange(ph.first_measure, ph.last_measure()) << " and is built from the chords \""
     << Joined(ChordNames(ph.chords), "-") << "\". ";
  if (level == Level::kBeginner) {
    os << "Each " << Link("chord") << " is a group of notes played together. ";
    std::vector<std::string> seen;
    for (const auto& c : ph.chords) {
      std::string name = c.Display();
      if (std::find(seen.begin(), seen.end(), name) != seen.end()) continue;
      seen.push_back(name);
      os << "The chord " << name << " (" << NoteNames(ChordTones(c), key) << ") is "
         << Article(QualityPhrase(c.quality)) << ". ";
    }
    os << "The left hand plays each chord as one long " << Link("whole note") << ".";
    return os.str();
  }
  os << "In " << Link("roman numeral") << "s its " << Link("chord progression") << " is the progression \""
     << JoinDegrees(ph.progression) << "\": ";
  std::vector<std::string> tags;
  for (const auto& d : ph.progression) tags.push_back(FunctionTag(d));
  os << JoinList(tags) << ". ";
  if (level == Level::kIntermediate) {
    os << "The entry comes from the " << CategoryName(db.Progression(ph.progression_id).category) << " family. ";
    os << "Chords with " << Link("tonic") << " function feel at rest, " << Link("subdominant")
       << " chords move away and " << Link("dominant") << " chords lead back home. ";
    os << "It was picked as the closest unused library match to the chords so far (similarity "
       << FormatBeats(ph.similarity) << ").";
  }
  for (std::size_t i = 0; i < ph.progression.size(); ++i) {
    if (!ph.substituted[i]) continue;
    os << " In measure " << ph.first_measure + static_cast<int>(i) + 1 << ", " << ph.progression[i].Display()
       << " stands in for " << ph.recommended[i].Display() << " (" << Link("diatonic substitution") << ").";
  }
  if (level == Level::kAdvanced) {
    Cadence c = PhraseCadence(ph.progression);
    if (c == Cadence::kNone) {
      os << " The phrase closes without a standard " << Link("cadence") << ".";
    } else {
      os << " The phrase closes with " << Article(CadenceName(c)) << " " << Link("cadence") << ".";
    }
    std::vector<std::string> chromatic;
    for (const auto& chord : ph.chords) {
      if (!AllDiatonic(chord, key)) chromatic.push_back(chord.Display());
    }
    if (chromatic.empty()) {
      os << " Every chord is diatonic to " << key.Name() << "; there is no " << Link("secondary dominant") << " or "
         << Link("modal interchange") << ".";
    } else {
      os << " Chromatic colour comes from " << JoinList(chromatic) << ", whose notes reach outside the key.";
    }
  }
  return os.str();
}

std::string PhraseRhythm(const Piece& piece, const CorpusDb& db, std::size_t j, Level level) {
  const Phrase& ph = piece.phrases[j];
  auto measures = RightMeasures(piece, ph.first_measure, ph.last_measure());
  std::ostringstream os;
  if (level == Level::kBeginner) {
    os << "Every measure has four beats (" << Link("time signature") << " 4/4). Across the phrase the right hand plays "
       << ValueSummary(measures) << ", while the left hand holds one " << Link("whole note") << " chord per measure.";
    return os.str();
  }
  std::vector<std::string> refs;
  for (int id : ph.rhythm_plan) {
    std::string ref = PatternRef(db, id);
    if (std::find(refs.begin(), refs.end(), ref) == refs.end()) refs.push_back(ref);
  }
  if (ph.rhythm_plan.front() == piece.analysis.fitted_rhythm) {
    os << "The phrase opens with " << PatternRef(db, ph.rhythm_plan.front())
       << ", the pattern fitted to your melody's first measure among the " << kRhythmCount << " "
       << Link("rhythm pattern") << "s. ";
  } else {
    os << "The phrase opens with " << PatternRef(db, ph.rhythm_plan.front()) << ", chosen by an edit in place of "
       << PatternRef(db, piece.analysis.fitted_rhythm) << ", one of the " << kRhythmCount << " "
       << Link("rhythm pattern") << "s. ";
  }
  if (refs.size() > 1) {
    os << "The remaining measures alternate between randomly drawn patterns; in all it uses " << JoinList(refs)
       << ".";
  }
  if (level == Level::kAdvanced) {
    std::vector<std::string> syncopated;
    for (const Measure* m : measures) {
      if (IsSyncopated(*m)) syncopated.push_back(std::to_string(m->index + 1));
    }
    if (syncopated.empty()) {
      os << " This phrase has no " << Link("syncopation") << ".";
    } else {
      os << " Syncopated measures (" << Link("syncopation") << "): " << Joined(syncopated, ", ") << ".";
    }
    os << " The " << Link("harmonic rhythm") << " stays at one chord per measure.";
  }
  return os.str();
}

std::string ScopeEmbellishment(const Piece& piece, const std::vector<const Measure*>& measures, Level level) {
  const Key& key = piece.analysis.key;
  auto ornaments = Ornaments(measures);
  std::ostringstream os;
  if (level == Level::kBeginner) os << "Extra notes that decorate the main melody are called " << Link("ornament") << "s. ";
  if (ornaments.empty()) {
    os << "No decoration was added here. ";
  } else {
    os << "Here the melody carries " << OrnamentCounts(ornaments) << ". ";
    for (const auto& o : ornaments) os << PlainOrnament(o, key) << " ";
  }
  if (level == Level::kBeginner) return os.str();
  for (const auto& o : ornaments) {
    if (!o.measure->chord) continue;
    int aux = o.note->ornament->auxiliary.midi;
    os << "The auxiliary note " << SpellMidi(aux, key) << " is " << (IsChordTone(*o.measure->chord, Pc(aux)) ? "" : "not ")
       << "a " << Link("chord tone") << " of " << o.measure->chord->Display() << ". ";
  }
  os << "Each ornament was chosen so that its neighbouring note sits as close as possible to the current chord.";
  if (level == Level::kAdvanced) {
    int tense = static_cast<int>(std::count_if(ornaments.begin(), ornaments.end(), [](const auto& o) {
      return o.measure->chord && !IsChordTone(*o.measure->chord, o.note->ornament->auxiliary.pitch_class());
    }));
    if (tense > 0) {
      os << " Ornaments whose neighbour clashes with the chord create " << Link("tension and release") << ".";
    }
    os << " For " << Link("voice leading") << ", the largest melodic interval in this scope is "
       << Plural(LargestLeap(measures), "semitone") << ".";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Piece scope
// ---------------------------------------------------------------------------

std::string PieceChords(const Piece& piece, Level level) {
  const Key& key = piece.analysis.key;
  std::ostringstream os;
  os << "The piece is in the " << Link("key") << " of " << key.Name() << ". Your melody fills "
     << MeasureRange(0, piece.input_measures - 1) << " and implies the progression \""
     << JoinDegrees(piece.analysis.degrees) << "\". ";
  if (piece.phrases.empty()) {
    os << "No " << Link("phrase") << " has been generated yet.";
  } else {
    os << Plural(static_cast<int>(piece.phrases.size()), Link("phrase")) << " follow it. ";
  }
  for (std::size_t j = 0; j < piece.phrases.size(); ++j) {
    const Phrase& ph = piece.phrases[j];
    os << "Phrase " << j + 1 << " (" << MeasureRange(ph.first_measure, ph.last_measure()) << ") uses the chords \""
       << Joined(ChordNames(ph.chords), "-") << "\"";
    if (level != Level::kBeginner) os << ", progression \"" << JoinDegrees(ph.progression) << "\"";
    os << ". ";
  }
  if (piece.ended) {
    const ChordSymbol& last = *piece.score.parts[0].measures.back().chord;
    os << "The piece ends on the chord " << last.Display() << ", the " << Link("tonic") << " or home chord.";
  }
  if (level == Level::kIntermediate && !piece.phrases.empty()) {
    os << " Each phrase was chosen by comparing the " << Link("chord progression")
       << " so far with the library and taking the closest unused match; " << Link("tonic") << ", "
       << Link("subdominant") << " and " << Link("dominant") << " chords alternate to give a sense of departure and return.";
  }
  if (level == Level::kAdvanced) {
    for (std::size_t j = 0; j < piece.phrases.size(); ++j) {
      Cadence c = PhraseCadence(piece.phrases[j].progression);
      if (c == Cadence::kNone) {
        os << " Phrase " << j + 1 << " closes without a standard " << Link("cadence") << ".";
      } else {
        os << " Phrase " << j + 1 << " closes with " << Article(CadenceName(c)) << " " << Link("cadence") << ".";
      }
    }
  }
  return os.str();
}

std::string PieceRhythm(const Piece& piece, const CorpusDb& db, Level level) {
  std::vector<const Measure*> all;
  for (const auto& m : piece.score.parts[0].measures) all.push_back(&m);
  std::ostringstream os;
  if (level == Level::kBeginner) {
    os << "Every measure has four beats (" << Link("time signature") << " 4/4). The right hand plays "
       << ValueSummary(all) << " in total.";
    return os.str();
  }
  os << "Your first measure matched " << PatternRef(db, piece.analysis.fitted_rhythm) << " among the "
     << kRhythmCount << " " << Link("rhythm pattern") << "s, and every phrase opens with it.";
  std::vector<std::string> refs;
  for (const auto& ph : piece.phrases) {
    for (int id : ph.rhythm_plan) {
      std::string ref = PatternRef(db, id);
      if (std::find(refs.begin(), refs.end(), ref) == refs.end()) refs.push_back(ref);
    }
  }
  if (!refs.empty()) os << " Over the whole piece the generated measures use " << JoinList(refs) << ".";
  if (level == Level::kAdvanced) {
    std::vector<std::string> syncopated;
    for (const Measure* m : all) {
      if (IsSyncopated(*m)) syncopated.push_back(std::to_string(m->index + 1));
    }
    if (syncopated.empty()) {
      os << " The piece has no " << Link("syncopation") << ".";
    } else {
      os << " Syncopated measures (" << Link("syncopation") << "): " << Joined(syncopated, ", ") << ".";
    }
  }
  return os.str();
}

void CheckScope(const Piece& piece, Scope scope) {
  if (scope.kind == Scope::Kind::kMeasure &&
      (scope.index < 0 || scope.index >= static_cast<int>(piece.score.measure_count()))) {
    throw Error(ErrorCode::kScopeOutOfRange, "measure " + std::to_string(scope.index) + " is out of range");
  }
  if (scope.kind == Scope::Kind::kPhrase &&
      (scope.index < 0 || scope.index >= static_cast<int>(piece.phrases.size()))) {
    throw Error(ErrorCode::kScopeOutOfRange, "phrase " + std::to_string(scope.index) + " is out of range");
  }
}

// Collapses runs of spaces and trims the ends.
std::string Tidy(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
    out += c;
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view LevelName(Level level) {
  switch (level) {
    case Level::kBeginner: return "beginner";
    case Level::kIntermediate: return "intermediate";
    case Level::kAdvanced: return "advanced";
  }
  return "";
}

Level ParseLevel(std::string_view text) {
  std::string s = Lower(text);
  if (s == "beginner") return Level::kBeginner;
  if (s == "intermediate") return Level::kIntermediate;
  if (s == "advanced") return Level::kAdvanced;
  throw Error(ErrorCode::kInvalidArgument, "level must be beginner, intermediate or advanced");
}

std::string_view AspectName(Aspect aspect) {
  switch (aspect) {
    case Aspect::kChords: return "chords";
    case Aspect::kRhythm: return "rhythm";
    case Aspect::kEmbellishment: return "embellishment";
  }
  return "";
}

std::string Scope::ToString() const {
  switch (kind) {
    case Kind::kMeasure: return "measure:" + std::to_string(index);
    case Kind::kPhrase: return "phrase:" + std::to_string(index);
    case Kind::kPiece: return "piece";
  }
  return "";
}

Scope Scope::Parse(std::string_view text) {
  if (text == "piece") return Piece();
  auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    std::string_view kind = text.substr(0, colon);
    std::string number(text.substr(colon + 1));
    try {
      std::size_t used = 0;
      int i = std::stoi(number, &used);
      if (used == number.size()) {
        if (kind == "measure") return Measure(i);
        if (kind == "phrase") return Phrase(i);
      }
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::kInvalidArgument,
              "scope must be 'piece', 'measure:<n>' or 'phrase:<n>', got '" + std::string(text) + "'");
}

const std::vector<GlossaryEntry>& Glossary() {
  static const std::vector<GlossaryEntry> kGlossary = {
      {"key", "The home scale of a piece, named by its tonic and mode, such as D major."},
      {"scale", "The seven notes of a key arranged in order, such as D E F# G A B C# in D major."},
      {"chord", "Several notes sounded together."},
      {"triad", "A three-note chord built from stacked thirds: root, third and fifth."},
      {"seventh chord", "A triad with a fourth note a seventh above the root."},
      {"major chord", "A triad with a major third and a perfect fifth above the root."},
      {"minor chord", "A triad with a minor third and a perfect fifth above the root."},
      {"diminished chord", "A triad with a minor third and a diminished fifth above the root."},
      {"augmented fourth", "An interval of six semitones, also called a tritone; here it replaces the fifth of a major triad."},
      {"chord tone", "A note that belongs to the chord currently sounding."},
      {"scale degree", "The position of a note or chord root within the scale, numbered 1 to 7."},
      {"roman numeral", "Chord names written as scale degrees: upper case for major, lower case for minor, as in I-IV-V-I."},
      {"diatonic", "Belonging to the seven notes of the current key."},
      {"chromatic", "Using notes outside the current key."},
      {"harmonic function", "The role a chord plays in a key: tonic, subdominant or dominant."},
      {"tonic", "The home chord or note of a key (degree I); it sounds at rest."},
      {"subdominant", "Chords on degrees IV and ii that move away from the tonic."},
      {"dominant", "Chords on degrees V and vii that create tension pulling back to the tonic."},
      {"leading tone", "The seventh scale degree, a semitone below the tonic, which pulls upward."},
      {"chord progression", "An ordered series of chords, often written in roman numerals such as I-IV-V-I."},
      {"phrase", "One complete chord progression treated as a musical sentence."},
      {"cadence", "The chord motion that ends a phrase."},
      {"authentic cadence", "The ending V-I, the strongest way to close."},
      {"plagal cadence", "The ending IV-I, sometimes called the amen cadence."},
      {"half cadence", "A phrase that stops on V, sounding unfinished."},
      {"diatonic substitution", "Replacing a chord with another chord from the same key that shares common tones, such as vi for I."},
      {"common tone", "A note shared by two chords."},
      {"secondary dominant", "A dominant chord borrowed to point at a chord other than the tonic."},
      {"modal interchange", "Borrowing chords from the parallel major or minor key."},
      {"beat", "The steady pulse you tap along to."},
      {"time signature", "How many beats each measure holds; 4/4 means four quarter-note beats."},
      {"whole note", "A note lasting four beats, a full measure of 4/4."},
      {"rest", "A silence lasting a set number of beats."},
      {"rhythm pattern", "A one-measure template of notes and rests."},
      {"syncopation", "Emphasis placed off the beat, for example a note that starts between beats and is held across the next one."},
      {"harmonic rhythm", "How often the chord changes."},
      {"polyrhythm", "Two different divisions of the beat sounding at once, such as triplets against a steady pulse."},
      {"ornament", "Extra notes that decorate a melody note."},
      {"appoggiatura", "A neighbouring note that takes the first part of a melody note before resolving to it."},
      {"mordent", "A quick alternation from the main note to the note below and back."},
      {"trill", "A rapid alternation between the main note and the note above."},
      {"arpeggio", "The notes of a chord played one after another instead of together."},
      {"tension and release", "A clash or pull that is followed by a resolution."},
      {"voice leading", "How each melodic line moves from note to note, ideally by small steps."},
      {"circle of fifths", "Keys arranged so that neighbours differ by a fifth and share all but one note."},
  };
  return kGlossary;
}

const GlossaryEntry* FindTerm(std::string_view id) {
  for (const auto& e : Glossary()) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

ExplanationDoc Explain(const Piece& piece, const CorpusDb& db, Scope scope, Level level) {
  CheckScope(piece, scope);
  ExplanationDoc doc;
  doc.scope = scope;
  doc.level = level;
  std::string chords, rhythm, embellishment;
  switch (scope.kind) {
    case Scope::Kind::kMeasure: {
      MeasureFacts f = FactsFor(piece, scope.index);
      chords = MeasureChords(piece, f, level);
      rhythm = MeasureRhythm(piece, db, f, level);
      embellishment = MeasureEmbellishment(piece, f, level);
      break;
    }
    case Scope::Kind::kPhrase: {
      auto j = static_cast<std::size_t>(scope.index);
      const Phrase& ph = piece.phrases[j];
      chords = PhraseChords(piece, db, j, level);
      rhythm = PhraseRhythm(piece, db, j, level);
      embellishment = ScopeEmbellishment(piece, RightMeasures(piece, ph.first_measure, ph.last_measure()), level);
      break;
    }
    case Scope::Kind::kPiece: {
      chords = PieceChords(piece, level);
      rhythm = PieceRhythm(piece, db, level);
      std::vector<const Measure*> all;
      for (const auto& m : piece.score.parts[0].measures) all.push_back(&m);
      embellishment = ScopeEmbellishment(piece, all, level);
      break;
    }
  }
  doc.sections = {{Aspect::kChords, Tidy(chords)},
                  {Aspect::kRhythm, Tidy(rhythm)},
                  {Aspect::kEmbellishment, Tidy(embellishment)}};
  doc.terms = ExtractTerms(doc);
  return doc;
}

std::string RenderReport(const Piece& piece, const CorpusDb& db, Level level) {
  const MelodyAnalysis& a = piece.analysis;
  std::ostringstream os;
  os << "# Composition report\n\n";
  os << "- Key: " << a.key.Name() << (a.ranking.ambiguous ? " (ambiguous)" : "") << "\n";
  os << "- Input degrees: " << JoinDegrees(a.degrees, " ") << "\n";
  os << "- Fitted rhythm: " << PatternRef(db, a.fitted_rhythm) << ", distance " << a.fit_distance << "\n";
  os << "- Phrases: " << piece.phrases.size() << "\n";
  os << "- Measures: " << piece.score.measure_count() << (piece.ended ? " (ended)" : "") << "\n";
  os << "- Level: " << LevelName(level) << "\n";

  auto write_doc = [&](const ExplanationDoc& doc) {
    for (const auto& section : doc.sections) {
      std::string title(AspectName(section.aspect));
      title.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(title.front())));
      os << "\n### " << title << "\n\n" << RenderMarkdown(section.text) << "\n";
    }
  };
  os << "\n## Piece\n";
  write_doc(Explain(piece, db, Scope::Piece(), level));
  for (std::size_t j = 0; j < piece.phrases.size(); ++j) {
    const Phrase& ph = piece.phrases[j];
    os << "\n## Phrase " << j + 1 << ": " << JoinDegrees(ph.progression) << " (" << ph.progression_id << ", "
       << MeasureRange(ph.first_measure, ph.last_measure()) << ")\n";
    write_doc(Explain(piece, db, Scope::Phrase(static_cast<int>(j)), level));
  }
  return os.str();
}

std::vector<std::string> ExtractTerms(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find("[[", pos)) != std::string_view::npos) {
    auto end = text.find("]]", pos + 2);
    if (end == std::string_view::npos) break;
    std::string term(text.substr(pos + 2, end - pos - 2));
    if (std::find(out.begin(), out.end(), term) == out.end()) out.push_back(term);
    pos = end + 2;
  }
  return out;
}

std::vector<std::string> ExtractTerms(const ExplanationDoc& doc) {
  std::vector<std::string> out;
  for (const auto& s : doc.sections) {
    for (auto& t : ExtractTerms(s.text)) {
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
    }
  }
  return out;
}

namespace {

std::string RenderLinks(std::string_view text, std::string_view open, std::string_view close) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto start = text.find("[[", pos);
    auto end = start == std::string_view::npos ? start : text.find("]]", start + 2);
    if (end == std::string_view::npos) {
      out += text.substr(pos);
      return out;
    }
    out += text.substr(pos, start - pos);
    out += open;
    out += text.substr(start + 2, end - start - 2);
    out += close;
    pos = end + 2;
  }
}

}  // namespace

std::string RenderPlain(std::string_view text) { return RenderLinks(text, "", ""); }

std::string RenderMarkdown(std::string_view text) { return RenderLinks(text, "*", "*"); }

std::string NoteValueName(const Beats& d) {
  static const std::vector<std::pair<Beats, std::string>> kNames = {
      {Beats(4), "whole note"},
      {Beats(3), "dotted half note"},
      {Beats(2), "half note"},
      {Beats(3, 2), "dotted quarter note"},
      {Beats(1), "quarter note"},
      {Beats(3, 4), "dotted eighth note"},
      {Beats(2, 3), "triplet quarter note"},
      {Beats(1, 2), "eighth note"},
      {Beats(1, 3), "triplet eighth note"},
      {Beats(1, 4), "sixteenth note"},
      {Beats(1, 6), "triplet sixteenth note"},
  };
  for (const auto& [value, name] : kNames) {
    if (value == d) return name;
  }
  return "note of " + FormatBeats(d) + " beat";
}

bool IsSyncopated(const Measure& measure) {
  bool downbeat_rest = false;
  bool offbeat_sound = false;
  for (const auto& e : measure.events) {
    if (e.onset == 0 && !e.is_note()) downbeat_rest = true;
    if (!e.is_note()) continue;
    const bool on_beat = e.onset.denominator() == 1;
    if (!on_beat) {
      Beats next_beat(e.onset.numerator() / e.onset.denominator() + 1);
      if (e.end() > next_beat) return true;
    }
    if (e.onset != 0) offbeat_sound = true;
  }
  return downbeat_rest && offbeat_sound;
}

Cadence PhraseCadence(const std::vector<DegreeSymbol>& progression) {
  if (progression.size() < 2) return Cadence::kNone;
  const DegreeSymbol& last = progression.back();
  const DegreeSymbol& before = progression[progression.size() - 2];
  const bool last_tonic = last.degree == 1 && !last.flat && last.quality != ChordQuality::kAugmented4;
  const bool before_plain = !before.flat;
  if (last_tonic && before_plain && before.degree == 5) return Cadence::kAuthentic;
  if (last_tonic && before_plain && before.degree == 4) return Cadence::kPlagal;
  if (!last.flat && last.degree == 5) return Cadence::kHalf;
  return Cadence::kNone;
}

std::string_view CadenceName(Cadence cadence) {
  switch (cadence) {
    case Cadence::kNone: return "no";
    case Cadence::kAuthentic: return "authentic";
    case Cadence::kPlagal: return "plagal";
    case Cadence::kHalf: return "half";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Mentor
// ---------------------------------------------------------------------------

std::string_view MentorSourceName(MentorSource source) {
  return source == MentorSource::kLive ? "live" : "stub";
}

CannedMentor CannedMentor::Load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

CannedMentor CannedMentor::Parse(std::string_view text) {
  std::map<std::string, std::string> answers;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto bar = line.find('|');
    if (bar == std::string::npos) {
      throw Error(ErrorCode::kParseError, "mentor_responses:" + std::to_string(number) + ": expected 'key | answer'");
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = Lower(trim(line.substr(0, bar)));
    std::string answer = trim(line.substr(bar + 1));
    if (key.empty() || answer.empty()) {
      throw Error(ErrorCode::kParseError, "mentor_responses:" + std::to_string(number) + ": empty key or answer");
    }
    answers[key] = answer;
  }
  return CannedMentor(std::move(answers));
}

std::string CannedMentor::Answer(std::string_view query) const {
  const std::string q = Lower(query);
  const std::string* best = nullptr;
  std::size_t best_len = 0;
  for (const auto& [key, answer] : answers_) {
    if (key.size() > best_len && q.find(key) != std::string::npos) {
      best = &answer;
      best_len = key.size();
    }
  }
  if (best) return *best;
  const GlossaryEntry* term = nullptr;
  for (const auto& e : Glossary()) {
    if (q.find(e.id) != std::string::npos && (!term || e.id.size() > term->id.size())) term = &e;
  }
  if (term) return term->definition;
  return "I do not have a prepared answer for that yet. Try one of the linked terms in the explanation, "
         "such as tonic, cadence or syncopation.";
}

MentorExchange MentorAsk(std::string_view query, const CannedMentor& canned, MentorBackend* live) {
  auto first = query.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw Error(ErrorCode::kInvalidArgument, "the mentor query is empty");
  MentorExchange out;
  out.query = std::string(query);
  if (live) {
    out.response = live->Complete(std::string(kMentorSystemPrompt), out.query);
    if (out.response.empty()) throw Error(ErrorCode::kMentorUnavailable, "the mentor returned an empty answer");
    out.source = MentorSource::kLive;
  } else {
    out.response = canned.Answer(query);
    out.source = MentorSource::kStub;
  }
  return out;
}

}  // namespace cadenza
