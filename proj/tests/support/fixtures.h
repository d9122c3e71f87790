/// @file
/// @brief Deterministic inputs shared by unit and acceptance tests: the
/// D-major demo melody, synthetic tones, and hand-assembled SMF bytes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cadenza/capture.h"
#include "cadenza/corpus.h"
#include "cadenza/score.h"

namespace cadenza::testing {

/// D4 F#4 A4 D5 | G4 B4 G4 D4, quarter notes.
inline const std::vector<int> kDemoPitches = {62, 66, 69, 74, 67, 71, 67, 62};

/// One right-hand part, two measures.
Score DemoMelody();

/// SMF bytes written from DemoMelody() at 120 bpm.
std::vector<std::uint8_t> DemoMidiBytes();

enum class Waveform { kSine, kSaw };

struct ToneSpec {
  double hz = 440.0;
  double seconds = 0.5;
};

/// Concatenated tones, amplitude 0.5, 5 ms linear fades at each edge.
capture::AudioBuffer Synthesize(const std::vector<ToneSpec>& tones, Waveform wave, int sample_rate = 44100);

double MidiToHz(int midi);

/// The demo melody as audio: eight 0.5 s sine tones (quarter notes at 120 bpm).
std::vector<std::uint8_t> DemoWavBytes();

/// Source-tree fixture directory (tests/fixtures).
std::filesystem::path FixtureDir();
std::vector<std::uint8_t> ReadBytes(const std::filesystem::path& path);

/// Corpus shipped in data/.
const CorpusDb& ShippedCorpus();

}  // namespace cadenza::testing
