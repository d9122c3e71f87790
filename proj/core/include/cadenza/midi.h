/// @file
/// @brief Standard MIDI File (format 0/1) reader and writer, and conversion
/// between SMF documents and Score.

#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "cadenza/score.h"

namespace cadenza::midi {

/// Output resolution; divisible by 3 and 16 so triplets and sixteenths are exact.
inline constexpr int kOutputDivision = 480;
inline constexpr int kVelocity = 80;

struct NoteOn {
  std::uint8_t channel = 0;
  std::uint8_t key = 60;
  std::uint8_t velocity = kVelocity;
  friend bool operator==(const NoteOn&, const NoteOn&) = default;
};

/// Also produced for note-on messages with velocity 0.
struct NoteOff {
  std::uint8_t channel = 0;
  std::uint8_t key = 60;
  std::uint8_t velocity = 0;
  friend bool operator==(const NoteOff&, const NoteOff&) = default;
};

struct Tempo {
  std::uint32_t microseconds_per_quarter = 500000;
  friend bool operator==(const Tempo&, const Tempo&) = default;
};

struct EndOfTrack {
  friend bool operator==(const EndOfTrack&, const EndOfTrack&) = default;
};

/// Any other event, kept byte-for-byte: status byte (explicit even when the
/// source used running status), then the rest of the message.
struct OpaqueEvent {
  std::vector<std::uint8_t> bytes;
  friend bool operator==(const OpaqueEvent&, const OpaqueEvent&) = default;
};

using EventBody = std::variant<NoteOn, NoteOff, Tempo, EndOfTrack, OpaqueEvent>;

struct TimedEvent {
  std::uint64_t tick = 0;  // absolute
  EventBody body;
  friend bool operator==(const TimedEvent&, const TimedEvent&) = default;
};

using Track = std::vector<TimedEvent>;

struct SmfDocument {
  int format = 1;
  int division = kOutputDivision;
  std::vector<Track> tracks;
  friend bool operator==(const SmfDocument&, const SmfDocument&) = default;
};

/// Throws Error(kMalformedHeader | kTruncatedChunk | kUnmatchedNoteOn).
SmfDocument ParseSmf(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> WriteSmf(const SmfDocument& doc);

/// Minimal-length variable-length quantity (at most 4 bytes, value < 2^28).
void AppendVlq(std::vector<std::uint8_t>& out, std::uint32_t value);

struct ImportOptions {
  /// Merge every note-bearing track into one part and reject overlapping notes
  /// (Error kPolyphonicInput). When false, each note-bearing track becomes a
  /// part and simultaneous notes are kept.
  bool monophonic = true;
};

/// Ticks become exact beats, snapped to the nearest 1/12 beat; measures split
/// every four beats. Notes crossing a barline are split at the barline.
Score SmfToScore(const SmfDocument& doc, ImportOptions options = {});

/// Format 1, division 480: track 0 tempo, then one track per part. Ornaments
/// are written as their literal notes. Both hands use channel 0, program 0.
SmfDocument ScoreToSmf(const Score& score);

/// 60e6 / bpm, rounded to the nearest microsecond.
std::uint32_t TempoFromBpm(int bpm);

}  // namespace cadenza::midi
