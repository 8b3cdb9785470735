// Copyright 2026 The cmgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Paired-data synthesis for denoising (additive noise at a target SNR),
// dereverberation (convolution with a decaying-noise RIR) and bandwidth
// extension (low-pass by down/up-sampling), plus bundled synthetic sources.

#ifndef CMGAN_DEGRADE_HPP_
#define CMGAN_DEGRADE_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmgan/audio_io.hpp"
#include "cmgan/nn/tensor.hpp"

namespace cmgan {

class DegradeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// y = x + g n with 10 log10(sum x^2 / sum (g n)^2) == snr_db over the whole
// track. The noise is looped or cropped to the clean length.
Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db);

// Linear convolution truncated to the clean length and rescaled to the clean
// peak amplitude.
Waveform convolve_rir(const Waveform& clean, const Waveform& rir);

// Amplitude envelope 10^(-3 n / (t60 fs)): the energy falls by 60 dB after
// t60 seconds.
Eigen::VectorXd rir_envelope(double t60, int sample_rate, Index length);

// Unit direct-path impulse followed by enveloped white noise (|tail| < 0.5),
// 1.2 * t60 long. Deterministic per seed.
Waveform synth_rir(double t60, int sample_rate, std::uint64_t seed);

// 16 kHz -> 16/s kHz -> 16 kHz; output length equals input length.
Waveform make_lowres(const Waveform& clean, int scale);

enum class NoiseKind { kWhite, kPink, kBabble, kDoorbell };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& name);

// Unit-variance-scale synthetic noise, deterministic per seed.
Waveform synth_noise(NoiseKind kind, Index length, int sample_rate,
                     std::uint64_t seed);

// Voiced/unvoiced harmonic signal with a wandering pitch, formant-like
// spectral envelope and syllable-rate amplitude modulation.
Waveform synth_speech(Index length, int sample_rate, std::uint64_t seed);

struct DegradeSpec {
  Task task = Task::kDenoise;
  std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0};
  std::vector<NoiseKind> noises{NoiseKind::kWhite, NoiseKind::kPink,
                                NoiseKind::kBabble, NoiseKind::kDoorbell};
  double t60_min = 0.3;
  double t60_max = 0.7;
  std::vector<int> scales{2, 4, 8};
  // Stationary noise added on top of reverberation.
  bool reverb_noise = false;
  double reverb_noise_snr_db = 20.0;

  void validate() const;
};

// Uniform index in [0, n) for draw `salt` of item `item`.
std::size_t draw_index(std::uint64_t seed, std::uint64_t item, std::uint64_t salt,
                       std::size_t n);
double draw_uniform(std::uint64_t seed, std::uint64_t item, std::uint64_t salt);

// Degrades every *.wav in clean_dir (sorted by name) into
// out_dir/degraded/ and writes out_dir/manifest.jsonl; returns its path.
std::string build_dataset(const std::string& clean_dir, const DegradeSpec& spec,
                          const std::string& out_dir, std::uint64_t seed);

// Writes `count` synthetic speech tracks of `seconds` each into dir.
std::vector<std::string> write_synthetic_corpus(const std::string& dir, int count,
                                                double seconds, std::uint64_t seed);

}  // namespace cmgan

#endif  // CMGAN_DEGRADE_HPP_
