#include "fixtures.h"

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

#include "cadenza/errors.h"
#include "cadenza/midi.h"

namespace cadenza::testing {

Score DemoMelody() {
  std::vector<GridNote> notes;
  for (std::size_t i = 0; i < kDemoPitches.size(); ++i) {
    auto start = static_cast<std::int64_t>(i) * kGridUnitsPerBeat;
    notes.push_back({start, start + kGridUnitsPerBeat, kDemoPitches[i]});
  }
  Score score;
  score.bpm = 120;
  score.parts.push_back(PartFromGridNotes(notes, 2, HandRole::kRightHand));
  return score;
}

std::vector<std::uint8_t> DemoMidiBytes() { return midi::WriteSmf(midi::ScoreToSmf(DemoMelody())); }

double MidiToHz(int midi) { return 440.0 * std::pow(2.0, (midi - 69) / 12.0); }

capture::AudioBuffer Synthesize(const std::vector<ToneSpec>& tones, Waveform wave, int sample_rate) {
  capture::AudioBuffer audio;
  audio.sample_rate = sample_rate;
  const int fade = sample_rate / 200;
  for (const auto& tone : tones) {
    const int n = static_cast<int>(std::lround(tone.seconds * sample_rate));
    for (int i = 0; i < n; ++i) {
      double phase = std::fmod(tone.hz * i / sample_rate, 1.0);
      double v = wave == Waveform::kSine ? std::sin(2 * std::numbers::pi * phase) : 2 * phase - 1;
      double env = 1.0;
      if (i < fade) env = static_cast<double>(i) / fade;
      if (n - 1 - i < fade) env = std::min(env, static_cast<double>(n - 1 - i) / fade);
      audio.samples.push_back(static_cast<float>(0.5 * v * env));
    }
  }
  return audio;
}

std::vector<std::uint8_t> DemoWavBytes() {
  std::vector<ToneSpec> tones;
  for (int p : kDemoPitches) tones.push_back({MidiToHz(p), 0.5});
  return capture::EncodeWavPcm16(Synthesize(tones, Waveform::kSine));
}

std::filesystem::path FixtureDir() { return CADENZA_FIXTURE_DIR; }

std::vector<std::uint8_t> ReadBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const CorpusDb& ShippedCorpus() {
  static const CorpusDb db = LoadCorpusFromDir(CADENZA_DATA_SOURCE_DIR);
  return db;
}

}  // namespace cadenza::testing
