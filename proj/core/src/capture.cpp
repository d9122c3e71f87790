#include "cadenza/capture.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "cadenza/errors.h"

namespace cadenza::capture {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t ReadU16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t ReadU32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

double Median(std::vector<double> values) {
  auto mid = values.begin() + (values.size() - 1) / 2;
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

}  // namespace

// ---------------------------------------------------------------------------
// WAV
// ---------------------------------------------------------------------------

AudioBuffer DecodeWav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kMalformedRiff, "not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t sample_rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    std::uint32_t len = ReadU32(hdr + 4);
    size_t body = pos + 8;
    size_t available = bytes.size() - body;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (len < 16 || len > available) throw Error(ErrorCode::kMalformedRiff, "truncated fmt chunk");
      const std::uint8_t* f = bytes.data() + body;
      format = ReadU16(f);
      channels = ReadU16(f + 2);
      sample_rate = ReadU32(f + 4);
      block_align = ReadU16(f + 12);
      bits = ReadU16(f + 14);
      if (format == kFormatExtensible) {
        if (len < 40) throw Error(ErrorCode::kMalformedRiff, "truncated WAVE_FORMAT_EXTENSIBLE");
        format = ReadU16(f + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      // Streaming writers sometimes leave the size unset; take what is there.
      data = bytes.subspan(body, std::min<size_t>(len, available));
      have_data = true;
      break;
    }
    if (len > available) break;
    pos = body + len + (len & 1);
  }
  if (!have_fmt) throw Error(ErrorCode::kMalformedRiff, "missing fmt chunk");
  if (!have_data) throw Error(ErrorCode::kMalformedRiff, "missing data chunk");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw Error(ErrorCode::kUnsupportedEncoding,
                "only PCM 16-bit and float 32-bit WAV are supported (format tag " +
                    std::to_string(format) + ", " + std::to_string(bits) + " bits)");
  }
  if (channels < 1 || channels > 2) {
    throw Error(ErrorCode::kUnsupportedEncoding, std::to_string(channels) + " channels not supported");
  }
  if (sample_rate < 8000 || sample_rate > 192000) {
    throw Error(ErrorCode::kUnsupportedEncoding,
                "sample rate " + std::to_string(sample_rate) + " Hz outside 8000-192000");
  }
  const size_t bytes_per_sample = bits / 8;
  const size_t frame_bytes = std::max<size_t>(block_align, bytes_per_sample * channels);

  AudioBuffer out;
  out.sample_rate = static_cast<int>(sample_rate);
  const size_t frames = data.size() / frame_bytes;
  out.samples.reserve(frames);
  for (size_t i = 0; i < frames; ++i) {
    const std::uint8_t* frame = data.data() + i * frame_bytes;
    double sum = 0;
    for (size_t c = 0; c < channels; ++c) {
      const std::uint8_t* s = frame + c * bytes_per_sample;
      if (pcm16) {
        sum += static_cast<std::int16_t>(ReadU16(s)) / 32768.0;
      } else {
        float v;
        std::uint32_t raw = ReadU32(s);
        std::memcpy(&v, &raw, sizeof v);
        sum += std::isfinite(v) ? std::clamp(v, -1.0f, 1.0f) : 0.0f;
      }
    }
    out.samples.push_back(static_cast<float>(sum / channels));
  }
  return out;
}

std::vector<std::uint8_t> EncodeWavPcm16(const AudioBuffer& audio) {
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::vector<std::uint8_t> out = {'R', 'I', 'F', 'F'};
  PutU32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(out, 16);
  PutU16(out, kFormatPcm);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(audio.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(audio.sample_rate * 2));
  PutU16(out, 2);
  PutU16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutU32(out, data_bytes);
  for (float s : audio.samples) {
    auto v = static_cast<std::int16_t>(std::lround(std::clamp(s, -1.0f, 1.0f) * 32767.0f));
    PutU16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// YIN
// ---------------------------------------------------------------------------

PitchEstimate YinFrame(std::span<const float> frame, int sample_rate, const YinConfig& config) {
  PitchEstimate none;
  const int n = static_cast<int>(frame.size());
  if (n < 4 || sample_rate <= 0) return none;

  double energy = 0;
  for (float s : frame) energy += static_cast<double>(s) * s;
  if (std::sqrt(energy / n) < config.silence_rms) return none;

  const int max_lag = std::min(static_cast<int>(sample_rate / config.min_frequency), n / 2);
  const int min_lag = std::max(2, static_cast<int>(sample_rate / config.max_frequency));
  if (min_lag + 1 >= max_lag) return none;
  const int window = n - max_lag;

  // Difference function d(tau) over a fixed integration window.
  std::vector<double> diff(max_lag + 1, 0.0);
  for (int tau = 1; tau <= max_lag; ++tau) {
    double acc = 0;
    for (int j = 0; j < window; ++j) {
      double d = static_cast<double>(frame[j]) - frame[j + tau];
      acc += d * d;
    }
    diff[tau] = acc;
  }

  // Cumulative mean normalized difference.
  std::vector<double> cmnd(max_lag + 1, 1.0);
  double running = 0;
  for (int tau = 1; tau <= max_lag; ++tau) {
    running += diff[tau];
    cmnd[tau] = running > 0 ? diff[tau] * tau / running : 1.0;
  }

  // First dip below the absolute threshold, followed down to its local minimum.
  int best = -1;
  for (int tau = min_lag; tau < max_lag; ++tau) {
    if (cmnd[tau] < config.threshold) {
      while (tau + 1 < max_lag && cmnd[tau + 1] < cmnd[tau]) ++tau;
      best = tau;
      break;
    }
  }
  if (best < 0) {
    double lowest = *std::min_element(cmnd.begin() + min_lag, cmnd.begin() + max_lag);
    none.confidence = std::clamp(1.0 - lowest, 0.0, 1.0);
    return none;
  }

  double refined = best;
  if (best > 1 && best < max_lag) {
    double a = cmnd[best - 1], b = cmnd[best], c = cmnd[best + 1];
    double denom = a - 2 * b + c;
    if (denom > 0) refined = best + 0.5 * (a - c) / denom;
  }
  PitchEstimate out;
  out.f0 = sample_rate / refined;
  out.confidence = std::clamp(1.0 - cmnd[best], 0.0, 1.0);
  return out;
}

PitchTrack TrackPitch(const AudioBuffer& audio, const YinConfig& config, std::stop_token stop) {
  PitchTrack track;
  track.hop_seconds = static_cast<double>(config.hop_size) / audio.sample_rate;
  const auto total = static_cast<std::int64_t>(audio.samples.size());
  if (total == 0) return track;
  const int half = config.frame_size / 2;
  std::vector<float> frame(config.frame_size);

  for (std::int64_t center = 0; center < total; center += config.hop_size) {
    if (stop.stop_requested()) throw Error(ErrorCode::kCancelled, "pitch tracking cancelled");
    for (int k = 0; k < config.frame_size; ++k) {
      std::int64_t idx = center - half + k;
      frame[k] = (idx >= 0 && idx < total) ? audio.samples[idx] : 0.0f;
    }
    double energy = 0;
    for (float s : frame) energy += static_cast<double>(s) * s;
    PitchEstimate est = YinFrame(frame, audio.sample_rate, config);
    PitchFrame pf;
    pf.time = static_cast<double>(center) / audio.sample_rate;
    pf.f0 = est.f0;
    pf.confidence = est.confidence;
    pf.rms = std::sqrt(energy / config.frame_size);
    track.frames.push_back(pf);
  }

  // Median over voiced neighbours removes isolated octave jumps.
  const int r = config.median_width / 2;
  std::vector<std::optional<double>> filtered(track.frames.size());
  for (size_t i = 0; i < track.frames.size(); ++i) {
    if (!track.frames[i].f0) continue;
    std::vector<double> window;
    for (int k = -r; k <= r; ++k) {
      auto j = static_cast<std::int64_t>(i) + k;
      if (j >= 0 && j < static_cast<std::int64_t>(track.frames.size()) && track.frames[j].f0) {
        window.push_back(*track.frames[j].f0);
      }
    }
    filtered[i] = Median(window);
  }
  for (size_t i = 0; i < track.frames.size(); ++i) track.frames[i].f0 = filtered[i];
  return track;
}

void WritePitchTrackCsv(const PitchTrack& track, std::ostream& out) {
  out << "time,f0,confidence\n";
  for (const auto& f : track.frames) {
    out << f.time << ',';
    if (f.f0) out << *f.f0;
    out << ',' << f.confidence << '\n';
  }
}

// ---------------------------------------------------------------------------
// Segmentation and quantization
// ---------------------------------------------------------------------------

double FrequencyToFractionalMidi(double hz) { return 69.0 + 12.0 * std::log2(hz / 440.0); }

int FrequencyToMidi(double hz) { return static_cast<int>(std::lround(FrequencyToFractionalMidi(hz))); }

std::vector<RawNote> SegmentNotes(const PitchTrack& track, const SegmentConfig& config) {
  std::vector<RawNote> notes;
  std::vector<double> run_f0;
  std::vector<double> run_midi;
  double run_start = 0, run_last = 0;
  const double half_hop = track.hop_seconds / 2;

  auto close_run = [&] {
    if (run_f0.empty()) return;
    double start = std::max(0.0, run_start - half_hop);
    double end = run_last + half_hop;
    if ((end - start) * 1000.0 >= config.min_note_ms) {
      notes.push_back({start, end, FrequencyToMidi(Median(run_f0))});
    }
    run_f0.clear();
    run_midi.clear();
  };

  for (const auto& frame : track.frames) {
    if (!frame.f0) {
      close_run();
      continue;
    }
    double m = FrequencyToFractionalMidi(*frame.f0);
    if (!run_midi.empty() && std::abs(m - Median(run_midi)) > config.max_semitone_deviation) {
      close_run();
    }
    if (run_f0.empty()) run_start = frame.time;
    run_f0.push_back(*frame.f0);
    run_midi.push_back(m);
    run_last = frame.time;
  }
  close_run();
  if (notes.empty()) throw Error(ErrorCode::kNoNotesDetected, "no notes detected in the recording");
  return notes;
}

Score QuantizeToScore(const std::vector<RawNote>& notes, int bpm) {
  Score score;
  score.bpm = bpm;
  if (notes.empty()) {
    score.parts.push_back(Part{});
    return score;
  }
  const double units_per_second = kGridUnitsPerBeat * bpm / 60.0;
  const double origin = notes.front().start;
  constexpr std::int64_t kMinUnits = kGridUnitsPerBeat / 4;

  std::vector<GridNote> grid;
  std::int64_t previous_end = 0;
  for (const auto& n : notes) {
    std::int64_t start = std::llround((n.start - origin) * units_per_second);
    std::int64_t end = std::llround((n.end - origin) * units_per_second);
    start = std::max(start, previous_end);
    end = std::max(end, start + kMinUnits);
    grid.push_back({start, end, std::clamp(n.midi, 0, 127)});
    previous_end = end;
  }
  score.parts.push_back(PartFromGridNotes(grid, MeasuresCovering(previous_end), HandRole::kRightHand));
  return score;
}

Score CaptureMelody(std::span<const std::uint8_t> wav_bytes, const CaptureOptions& options,
                    std::stop_token stop) {
  AudioBuffer audio = DecodeWav(wav_bytes);
  PitchTrack track = TrackPitch(audio, options.yin, stop);
  return QuantizeToScore(SegmentNotes(track, options.segment), options.bpm);
}

}  // namespace cadenza::capture
