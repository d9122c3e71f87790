/// @file
/// @brief Audio-to-score capture for monophonic melodies: WAV decoding, YIN
/// pitch tracking, note segmentation and grid quantization.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stop_token>
#include <vector>

#include "cadenza/score.h"

namespace cadenza::capture {

struct AudioBuffer {
  std::vector<float> samples;  // mono, [-1, 1]
  int sample_rate = 44100;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// RIFF/WAVE with PCM16 or float32 samples, 1-2 channels, 8-192 kHz.
/// Stereo is averaged to mono.
/// Throws Error(kMalformedRiff | kUnsupportedEncoding).
AudioBuffer DecodeWav(std::span<const std::uint8_t> bytes);

/// Mono PCM16 writer, used for fixtures and round-trip tests.
std::vector<std::uint8_t> EncodeWavPcm16(const AudioBuffer& audio);

struct YinConfig {
  double threshold = 0.15;
  double silence_rms = 0.01;
  double min_frequency = 70.0;
  double max_frequency = 1000.0;
  int frame_size = 2048;
  int hop_size = 256;
  int median_width = 5;
};

struct PitchEstimate {
  std::optional<double> f0;  // Hz
  double confidence = 0;     // 1 - normalized difference at the chosen lag
};

/// YIN on a single frame: difference function, cumulative mean normalized
/// difference, absolute threshold, parabolic interpolation.
PitchEstimate YinFrame(std::span<const float> frame, int sample_rate, const YinConfig& config = {});

struct PitchFrame {
  double time = 0;  // seconds, frame centre
  std::optional<double> f0;
  double confidence = 0;
  double rms = 0;
};

struct PitchTrack {
  std::vector<PitchFrame> frames;
  double hop_seconds = 0;
};

/// Sliding, centred frames (zero padded at the edges) with a median filter
/// over voiced f0 values. Checks `stop` between frames and throws
/// Error(kCancelled) when a stop is requested.
PitchTrack TrackPitch(const AudioBuffer& audio, const YinConfig& config = {},
                      std::stop_token stop = {});

/// CSV dump "time,f0,confidence" (f0 empty when unvoiced).
void WritePitchTrackCsv(const PitchTrack& track, std::ostream& out);

struct RawNote {
  double start = 0;  // seconds
  double end = 0;
  int midi = 0;
};

struct SegmentConfig {
  double min_note_ms = 80.0;
  double max_semitone_deviation = 0.5;
};

/// round(69 + 12 log2(f / 440)).
int FrequencyToMidi(double hz);
double FrequencyToFractionalMidi(double hz);

/// Voiced runs whose pitch stays within ±0.5 semitone of the run median.
/// Throws Error(kNoNotesDetected) when nothing survives.
std::vector<RawNote> SegmentNotes(const PitchTrack& track, const SegmentConfig& config = {});

/// Times are taken relative to the first note's onset (measure 1 starts
/// there), snapped to the 1/12-beat grid at `bpm`; minimum duration 1/4 beat;
/// gaps become rests; measures are padded to four beats.
Score QuantizeToScore(const std::vector<RawNote>& notes, int bpm);

struct CaptureOptions {
  YinConfig yin;
  SegmentConfig segment;
  int bpm = 120;
};

/// DecodeWav -> TrackPitch -> SegmentNotes -> QuantizeToScore.
Score CaptureMelody(std::span<const std::uint8_t> wav_bytes, const CaptureOptions& options = {},
                    std::stop_token stop = {});

}  // namespace cadenza::capture
