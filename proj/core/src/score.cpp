#include "cadenza/score.h"

#include <algorithm>
#include <sstream>

namespace cadenza {

namespace {

const Beats kGrid{1, 12};
const Beats kTrillSlice{1, 4};

Beats FloorToGrid(const Beats& b) {
  std::int64_t units = (b.numerator() * 12) / b.denominator();
  return Beats(units, 12);
}

}  // namespace

std::string_view OrnamentName(OrnamentKind kind) {
  switch (kind) {
    case OrnamentKind::kAppoggiatura: return "appoggiatura";
    case OrnamentKind::kMordent: return "mordent";
    case OrnamentKind::kTrill: return "trill";
  }
  return "";
}

std::string_view MeasureSourceName(MeasureSource source) {
  switch (source) {
    case MeasureSource::kInput: return "input";
    case MeasureSource::kGenerated: return "generated";
    case MeasureSource::kEdited: return "edited";
  }
  return "";
}

Beats Measure::SoundedDuration() const {
  Beats total{0};
  for (const auto& e : events) {
    if (e.is_note()) total += e.duration;
  }
  return total;
}

bool Measure::HasSoundedNotes() const {
  return std::any_of(events.begin(), events.end(), [](const NoteEvent& e) { return e.is_note(); });
}

bool MeasureIsComplete(const Measure& measure) {
  Beats covered{0};
  Beats last_onset{0};
  for (const auto& e : measure.events) {
    if (e.onset < last_onset || e.onset < 0 || e.duration <= 0 || e.end() > kMeasureLength) {
      return false;
    }
    if (e.onset > covered) return false;  // gap
    last_onset = e.onset;
    covered = std::max(covered, e.end());
  }
  return covered == kMeasureLength;
}

void NormalizeMeasure(Measure& measure) {
  auto& ev = measure.events;
  std::stable_sort(ev.begin(), ev.end(), [](const NoteEvent& a, const NoteEvent& b) {
    if (a.onset != b.onset) return a.onset < b.onset;
    int pa = a.pitch ? a.pitch->midi : -1;
    int pb = b.pitch ? b.pitch->midi : -1;
    return pa < pb;
  });
  std::vector<NoteEvent> filled;
  Beats covered{0};
  for (const auto& e : ev) {
    if (e.onset > covered) filled.push_back(NoteEvent::Rest(covered, e.onset - covered));
    filled.push_back(e);
    covered = std::max(covered, e.end());
  }
  if (covered < kMeasureLength) filled.push_back(NoteEvent::Rest(covered, kMeasureLength - covered));
  ev = std::move(filled);
}

Part PartFromGridNotes(const std::vector<GridNote>& notes, size_t measure_count, HandRole role) {
  Part part;
  part.role = role;
  part.measures.resize(measure_count);
  for (size_t i = 0; i < measure_count; ++i) part.measures[i].index = static_cast<int>(i);
  for (const auto& note : notes) {
    std::int64_t s = note.start;
    while (s < note.end) {
      std::int64_t m = s / kGridUnitsPerMeasure;
      std::int64_t e = std::min(note.end, (m + 1) * kGridUnitsPerMeasure);
      part.measures[m].events.push_back(NoteEvent::Note(
          note.midi, Beats(s - m * kGridUnitsPerMeasure, kGridUnitsPerBeat),
          Beats(e - s, kGridUnitsPerBeat)));
      s = e;
    }
  }
  for (auto& measure : part.measures) NormalizeMeasure(measure);
  return part;
}

size_t MeasuresCovering(std::int64_t units) {
  return static_cast<size_t>((units + kGridUnitsPerMeasure - 1) / kGridUnitsPerMeasure);
}

bool OrnamentFits(OrnamentKind kind, const Beats& duration) {
  switch (kind) {
    case OrnamentKind::kAppoggiatura: return FloorToGrid(duration / 2) >= kGrid;
    case OrnamentKind::kMordent: return FloorToGrid(duration / 8) >= kGrid;
    case OrnamentKind::kTrill: return duration >= Beats(1);
  }
  return false;
}

std::vector<NoteEvent> ExpandOrnament(const NoteEvent& note) {
  if (!note.is_note() || !note.ornament || !OrnamentFits(note.ornament->kind, note.duration)) {
    NoteEvent plain = note;
    plain.ornament.reset();
    return {plain};
  }
  const int main = note.pitch->midi;
  const int aux = note.ornament->auxiliary.midi;
  std::vector<NoteEvent> out;
  Beats t = note.onset;
  auto emit = [&](int midi, Beats len) {
    out.push_back(NoteEvent::Note(midi, t, len));
    t += len;
  };
  switch (note.ornament->kind) {
    case OrnamentKind::kAppoggiatura: {
      Beats lead = FloorToGrid(note.duration / 2);
      emit(aux, lead);
      emit(main, note.duration - lead);
      break;
    }
    case OrnamentKind::kMordent: {
      Beats slice = FloorToGrid(note.duration / 8);
      emit(main, slice);
      emit(aux, slice);
      emit(main, note.duration - 2 * slice);
      break;
    }
    case OrnamentKind::kTrill: {
      bool on_main = true;
      while (t < note.end()) {
        emit(on_main ? main : aux, std::min(kTrillSlice, note.end() - t));
        on_main = !on_main;
      }
      break;
    }
  }
  return out;
}

Score ExpandOrnaments(const Score& score) {
  Score out = score;
  for (auto& part : out.parts) {
    for (auto& measure : part.measures) {
      std::vector<NoteEvent> events;
      for (const auto& e : measure.events) {
        auto expanded = ExpandOrnament(e);
        events.insert(events.end(), expanded.begin(), expanded.end());
      }
      measure.events = std::move(events);
    }
  }
  return out;
}

bool SameNoteContent(const Score& a, const Score& b) {
  auto notes_of = [](const Measure& m) {
    std::vector<const NoteEvent*> out;
    for (const auto& e : m.events) {
      if (e.is_note()) out.push_back(&e);
    }
    return out;
  };
  if (a.parts.size() != b.parts.size()) return false;
  for (size_t p = 0; p < a.parts.size(); ++p) {
    const auto& ma = a.parts[p].measures;
    const auto& mb = b.parts[p].measures;
    if (ma.size() != mb.size()) return false;
    for (size_t m = 0; m < ma.size(); ++m) {
      auto na = notes_of(ma[m]);
      auto nb = notes_of(mb[m]);
      if (na.size() != nb.size()) return false;
      for (size_t i = 0; i < na.size(); ++i) {
        if (na[i]->pitch != nb[i]->pitch || na[i]->onset != nb[i]->onset ||
            na[i]->duration != nb[i]->duration) {
          return false;
        }
      }
    }
  }
  return true;
}

int UpperNeighbor(int midi, const Key& key) {
  auto scale = DiatonicScale(key);
  for (int m = midi + 1; m <= midi + 12; ++m) {
    if (std::find(scale.begin(), scale.end(), Pc(m)) != scale.end()) return m;
  }
  return midi + 1;
}

int LowerNeighbor(int midi, const Key& key) {
  auto scale = DiatonicScale(key);
  for (int m = midi - 1; m >= midi - 12; --m) {
    if (std::find(scale.begin(), scale.end(), Pc(m)) != scale.end()) return m;
  }
  return midi - 1;
}

std::string FormatBeats(const Beats& beats) {
  std::ostringstream os;
  os << beats.numerator();
  if (beats.denominator() != 1) os << '/' << beats.denominator();
  return os.str();
}

}  // namespace cadenza
