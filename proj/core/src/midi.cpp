#include "cadenza/midi.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "cadenza/errors.h"

namespace cadenza::midi {

namespace {

// ---------------------------------------------------------------------------
// Byte reading
// ---------------------------------------------------------------------------

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ >= data_.size(); }
  size_t position() const { return pos_; }

  std::uint8_t U8() {
    Need(1);
    return data_[pos_++];
  }
  std::uint8_t Peek() {
    Need(1);
    return data_[pos_];
  }
  std::uint16_t U16() {
    Need(2);
    std::uint16_t v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = (std::uint32_t{data_[pos_]} << 24) | (std::uint32_t{data_[pos_ + 1]} << 16) |
                      (std::uint32_t{data_[pos_ + 2]} << 8) | std::uint32_t{data_[pos_ + 3]};
    pos_ += 4;
    return v;
  }
  std::uint32_t Vlq() {
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
      std::uint8_t b = U8();
      value = (value << 7) | (b & 0x7F);
      if (!(b & 0x80)) return value;
    }
    throw Error(ErrorCode::kTruncatedChunk, "variable-length quantity longer than 4 bytes");
  }
  std::span<const std::uint8_t> Bytes(size_t n) {
    Need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  void Need(size_t n) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncatedChunk,
                  "unexpected end of data at byte " + std::to_string(pos_));
    }
  }

  std::span<const std::uint8_t> data_;
  size_t pos_ = 0;
};

int ChannelDataLength(std::uint8_t status) {
  switch (status & 0xF0) {
    case 0xC0:
    case 0xD0: return 1;
    default: return 2;
  }
}

Track ParseTrack(std::span<const std::uint8_t> chunk) {
  Reader in(chunk);
  Track track;
  std::uint64_t tick = 0;
  std::uint8_t running = 0;
  // (channel, key) -> ticks of currently sounding note-ons.
  std::map<std::pair<int, int>, std::vector<std::uint64_t>> open;

  while (!in.done()) {
    tick += in.Vlq();
    std::uint8_t status = in.Peek();
    if (status & 0x80) {
      in.U8();
    } else if (running) {
      status = running;
    } else {
      throw Error(ErrorCode::kTruncatedChunk, "data byte without a status byte");
    }

    if (status == 0xFF) {
      running = 0;
      std::uint8_t type = in.U8();
      std::uint32_t len = in.Vlq();
      auto payload = in.Bytes(len);
      if (type == 0x2F) {
        track.push_back({tick, EndOfTrack{}});
        break;
      }
      if (type == 0x51 && len == 3) {
        std::uint32_t us = (std::uint32_t{payload[0]} << 16) | (std::uint32_t{payload[1]} << 8) | payload[2];
        track.push_back({tick, Tempo{us}});
        continue;
      }
      OpaqueEvent raw;
      raw.bytes = {0xFF, type};
      AppendVlq(raw.bytes, len);
      raw.bytes.insert(raw.bytes.end(), payload.begin(), payload.end());
      track.push_back({tick, std::move(raw)});
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      running = 0;
      std::uint32_t len = in.Vlq();
      auto payload = in.Bytes(len);
      OpaqueEvent raw;
      raw.bytes = {status};
      AppendVlq(raw.bytes, len);
      raw.bytes.insert(raw.bytes.end(), payload.begin(), payload.end());
      track.push_back({tick, std::move(raw)});
      continue;
    }
    if (status >= 0xF0) {
      throw Error(ErrorCode::kTruncatedChunk, "system message inside a track");
    }

    running = status;
    std::uint8_t d1 = in.U8();
    std::uint8_t d2 = ChannelDataLength(status) == 2 ? in.U8() : 0;
    std::uint8_t channel = status & 0x0F;
    std::uint8_t kind = status & 0xF0;
    if (kind == 0x90 && d2 > 0) {
      open[{channel, d1}].push_back(tick);
      track.push_back({tick, NoteOn{channel, d1, d2}});
    } else if (kind == 0x80 || kind == 0x90) {
      auto it = open.find({channel, d1});
      if (it != open.end() && !it->second.empty()) {
        it->second.erase(it->second.begin());
        if (it->second.empty()) open.erase(it);
      }
      track.push_back({tick, NoteOff{channel, d1, kind == 0x80 ? d2 : std::uint8_t{0}}});
    } else {
      OpaqueEvent raw;
      raw.bytes = {status, d1};
      if (ChannelDataLength(status) == 2) raw.bytes.push_back(d2);
      track.push_back({tick, std::move(raw)});
    }
  }

  if (!open.empty()) {
    std::uint64_t first = UINT64_MAX;
    int key = 0;
    for (const auto& [ck, ticks] : open) {
      if (ticks.front() < first) {
        first = ticks.front();
        key = ck.second;
      }
    }
    throw Error(ErrorCode::kUnmatchedNoteOn, "note-on for key " + std::to_string(key) +
                                                 " at tick " + std::to_string(first) +
                                                 " has no matching note-off");
  }
  return track;
}

void AppendU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void AppendU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void AppendBody(std::vector<std::uint8_t>& out, const EventBody& body) {
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, NoteOn>) {
          out.insert(out.end(), {static_cast<std::uint8_t>(0x90 | e.channel), e.key, e.velocity});
        } else if constexpr (std::is_same_v<T, NoteOff>) {
          out.insert(out.end(), {static_cast<std::uint8_t>(0x80 | e.channel), e.key, e.velocity});
        } else if constexpr (std::is_same_v<T, Tempo>) {
          std::uint32_t us = e.microseconds_per_quarter;
          out.insert(out.end(), {0xFF, 0x51, 0x03, static_cast<std::uint8_t>(us >> 16),
                                 static_cast<std::uint8_t>(us >> 8), static_cast<std::uint8_t>(us)});
        } else if constexpr (std::is_same_v<T, EndOfTrack>) {
          out.insert(out.end(), {0xFF, 0x2F, 0x00});
        } else {
          out.insert(out.end(), e.bytes.begin(), e.bytes.end());
        }
      },
      body);
}

// Ticks -> units of 1/12 beat, rounded to nearest (halves up).
std::int64_t GridUnits(std::uint64_t tick, int division) {
  auto t = static_cast<std::int64_t>(tick);
  return (t * 24 + division) / (2 * static_cast<std::int64_t>(division));
}

std::vector<GridNote> CollectNotes(const Track& track, int division) {
  std::vector<GridNote> spans;
  std::map<std::pair<int, int>, std::vector<std::uint64_t>> open;
  for (const auto& ev : track) {
    if (const auto* on = std::get_if<NoteOn>(&ev.body)) {
      open[{on->channel, on->key}].push_back(ev.tick);
    } else if (const auto* off = std::get_if<NoteOff>(&ev.body)) {
      auto it = open.find({off->channel, off->key});
      if (it == open.end() || it->second.empty()) continue;
      std::uint64_t start = it->second.front();
      it->second.erase(it->second.begin());
      std::int64_t s = GridUnits(start, division);
      std::int64_t e = std::max(GridUnits(ev.tick, division), s + 1);
      spans.push_back({s, e, off->key});
    }
  }
  std::sort(spans.begin(), spans.end(), [](const GridNote& a, const GridNote& b) {
    return std::tie(a.start, a.midi) < std::tie(b.start, b.midi);
  });
  return spans;
}

std::optional<Tempo> FirstTempo(const SmfDocument& doc) {
  for (const auto& track : doc.tracks) {
    for (const auto& ev : track) {
      if (const auto* t = std::get_if<Tempo>(&ev.body)) return *t;
    }
  }
  return std::nullopt;
}

}  // namespace

void AppendVlq(std::vector<std::uint8_t>& out, std::uint32_t value) {
  std::uint8_t buf[4];
  int n = 0;
  buf[n++] = value & 0x7F;
  while ((value >>= 7) && n < 4) buf[n++] = static_cast<std::uint8_t>((value & 0x7F) | 0x80);
  while (n) out.push_back(buf[--n]);
}

SmfDocument ParseSmf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 14 || !std::equal(bytes.begin(), bytes.begin() + 4, "MThd")) {
    throw Error(ErrorCode::kMalformedHeader, "missing MThd header chunk");
  }
  Reader in(bytes);
  in.Bytes(4);
  std::uint32_t header_len = in.U32();
  if (header_len < 6) throw Error(ErrorCode::kMalformedHeader, "header chunk shorter than 6 bytes");
  auto header = in.Bytes(header_len);
  int format = (header[0] << 8) | header[1];
  int ntracks = (header[2] << 8) | header[3];
  int division = (header[4] << 8) | header[5];
  if (format > 1) {
    throw Error(ErrorCode::kMalformedHeader, "unsupported SMF format " + std::to_string(format));
  }
  if (division == 0 || (division & 0x8000)) {
    throw Error(ErrorCode::kMalformedHeader, "division must be positive ticks per quarter note");
  }

  SmfDocument doc;
  doc.format = format;
  doc.division = division;
  while (static_cast<int>(doc.tracks.size()) < ntracks) {
    if (in.remaining() < 8) {
      throw Error(ErrorCode::kTruncatedChunk,
                  "expected " + std::to_string(ntracks) + " tracks, found " +
                      std::to_string(doc.tracks.size()));
    }
    auto id = in.Bytes(4);
    std::uint32_t len = in.U32();
    if (in.remaining() < len) {
      throw Error(ErrorCode::kTruncatedChunk, "chunk length " + std::to_string(len) +
                                                  " exceeds remaining " +
                                                  std::to_string(in.remaining()) + " bytes");
    }
    auto body = in.Bytes(len);
    if (!std::equal(id.begin(), id.end(), "MTrk")) continue;  // unknown chunk type
    doc.tracks.push_back(ParseTrack(body));
  }
  return doc;
}

std::vector<std::uint8_t> WriteSmf(const SmfDocument& doc) {
  std::vector<std::uint8_t> out = {'M', 'T', 'h', 'd'};
  AppendU32(out, 6);
  AppendU16(out, static_cast<std::uint16_t>(doc.format));
  AppendU16(out, static_cast<std::uint16_t>(doc.tracks.size()));
  AppendU16(out, static_cast<std::uint16_t>(doc.division));
  for (const auto& track : doc.tracks) {
    std::vector<std::uint8_t> body;
    std::uint64_t last = 0;
    bool ended = false;
    for (const auto& ev : track) {
      AppendVlq(body, static_cast<std::uint32_t>(ev.tick - last));
      last = ev.tick;
      AppendBody(body, ev.body);
      if (std::holds_alternative<EndOfTrack>(ev.body)) {
        ended = true;
        break;
      }
    }
    if (!ended) {
      AppendVlq(body, 0);
      AppendBody(body, EndOfTrack{});
    }
    out.insert(out.end(), {'M', 'T', 'r', 'k'});
    AppendU32(out, static_cast<std::uint32_t>(body.size()));
    out.insert(out.end(), body.begin(), body.end());
  }
  return out;
}

std::uint32_t TempoFromBpm(int bpm) {
  return static_cast<std::uint32_t>((60'000'000 + bpm / 2) / bpm);
}

Score SmfToScore(const SmfDocument& doc, ImportOptions options) {
  Score score;
  if (auto tempo = FirstTempo(doc)) {
    double bpm = 60e6 / std::max<std::uint32_t>(tempo->microseconds_per_quarter, 1);
    score.bpm = std::clamp(static_cast<int>(std::lround(bpm)), 20, 300);
  }

  if (options.monophonic) {
    std::vector<GridNote> all;
    for (const auto& track : doc.tracks) {
      auto spans = CollectNotes(track, doc.division);
      all.insert(all.end(), spans.begin(), spans.end());
    }
    std::sort(all.begin(), all.end(), [](const GridNote& a, const GridNote& b) {
      return std::tie(a.start, a.midi) < std::tie(b.start, b.midi);
    });
    for (size_t i = 1; i < all.size(); ++i) {
      if (all[i].start < all[i - 1].end) {
        throw Error(ErrorCode::kPolyphonicInput,
                    "notes overlap at beat " + FormatBeats(Beats(all[i].start, 12)) +
                        "; only monophonic melodies are accepted");
      }
    }
    std::int64_t end = 0;
    for (const auto& s : all) end = std::max(end, s.end);
    score.parts.push_back(PartFromGridNotes(all, MeasuresCovering(end), HandRole::kRightHand));
    return score;
  }

  // One part per track; in format 1 the first track is the conductor track.
  size_t first = doc.format == 1 && doc.tracks.size() > 1 ? 1 : 0;
  std::vector<std::vector<GridNote>> per_track;
  std::int64_t end = 0;
  for (size_t t = first; t < doc.tracks.size(); ++t) {
    per_track.push_back(CollectNotes(doc.tracks[t], doc.division));
    for (const auto& s : per_track.back()) end = std::max(end, s.end);
  }
  for (const auto& track : doc.tracks) {
    if (!track.empty()) end = std::max(end, GridUnits(track.back().tick, doc.division));
  }
  size_t measures = MeasuresCovering(end);
  for (size_t i = 0; i < per_track.size(); ++i) {
    score.parts.push_back(
        PartFromGridNotes(per_track[i], measures, i == 0 ? HandRole::kRightHand : HandRole::kLeftHand));
  }
  return score;
}

SmfDocument ScoreToSmf(const Score& score) {
  SmfDocument doc;
  doc.format = 1;
  doc.division = kOutputDivision;
  const std::uint64_t ticks_per_measure = kOutputDivision * kBeatsPerMeasure;
  const std::uint64_t total = score.measure_count() * ticks_per_measure;

  Track conductor;
  conductor.push_back({0, Tempo{TempoFromBpm(score.bpm)}});
  conductor.push_back({0, OpaqueEvent{{0xFF, 0x58, 0x04, 0x04, 0x02, 0x18, 0x08}}});  // 4/4
  conductor.push_back({total, EndOfTrack{}});
  doc.tracks.push_back(std::move(conductor));

  Score expanded = ExpandOrnaments(score);
  for (const auto& part : expanded.parts) {
    // (tick, is_on, key) orders offs before ons at the same tick.
    std::vector<std::tuple<std::uint64_t, bool, int>> points;
    for (const auto& measure : part.measures) {
      for (const auto& e : measure.events) {
        if (!e.is_note()) continue;
        Beats start = Beats(measure.index * kBeatsPerMeasure) + e.onset;
        Beats on = start * kOutputDivision;
        Beats off = (start + e.duration) * kOutputDivision;
        points.emplace_back(static_cast<std::uint64_t>(off.numerator() / off.denominator()), false, e.pitch->midi);
        points.emplace_back(static_cast<std::uint64_t>(on.numerator() / on.denominator()), true, e.pitch->midi);
      }
    }
    std::sort(points.begin(), points.end());
    Track track;
    track.push_back({0, OpaqueEvent{{0xC0, 0x00}}});  // program 0 on channel 0
    for (const auto& [tick, is_on, key] : points) {
      auto k = static_cast<std::uint8_t>(key);
      if (is_on) {
        track.push_back({tick, NoteOn{0, k, kVelocity}});
      } else {
        track.push_back({tick, NoteOff{0, k, 0}});
      }
    }
    track.push_back({total, EndOfTrack{}});
    doc.tracks.push_back(std::move(track));
  }
  return doc;
}

}  // namespace cadenza::midi
