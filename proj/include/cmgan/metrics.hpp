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

// Intrusive objective metrics: SNR, segmental SNR, log-spectral distance,
// LPC-based LLR and cepstral distance, frequency-weighted segmental SNR.
// All functions take (reference, estimate) of equal length and rate.

#ifndef CMGAN_METRICS_HPP_
#define CMGAN_METRICS_HPP_

#include <Eigen/Core>

#include <stdexcept>
#include <string>

#include "cmgan/audio_io.hpp"
#include "cmgan/losses.hpp"

namespace cmgan {

struct MetricConfig {
  double snr_ceiling = 100.0;

  // Rectangular frames; a trailing partial frame is dropped.
  double ssnr_frame_seconds = 0.032;
  double ssnr_hop_seconds = 0.016;
  double ssnr_floor = -10.0;
  double ssnr_ceil = 35.0;

  Index lsd_window = 2048;
  Index lsd_hop = 512;
  double lsd_power_floor = 1e-10;

  // LPC analysis for LLR and CD: Hann frames, hop = frame / 4.
  Index lpc_order = 16;
  double lpc_frame_seconds = 0.030;
  double llr_clip = 2.0;
  double cd_clip = 10.0;
  // Fraction of frames (the smallest values) averaged by LLR and CD.
  double best_fraction = 0.95;

  Index fw_bands = 25;
  double fw_weight_exponent = 0.2;
  double fw_floor = -10.0;
  double fw_ceil = 35.0;

  void validate() const;
};

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class LogBase { kNatural, kTen };

double snr(const Waveform& x, const Waveform& y, const MetricConfig& cfg = {});
double ssnr(const Waveform& x, const Waveform& y, const MetricConfig& cfg = {});
double lsd(const Waveform& x, const Waveform& y, LogBase base,
           const MetricConfig& cfg = {});
double llr(const Waveform& x, const Waveform& y, const MetricConfig& cfg = {});
double cd(const Waveform& x, const Waveform& y, const MetricConfig& cfg = {});
double fwsegsnr(const Waveform& x, const Waveform& y, const MetricConfig& cfg = {});

// r[0..order] of the frame.
Eigen::VectorXd autocorrelation(const Eigen::VectorXd& frame, Index order);

// Levinson-Durbin: coefficients a[0..order] with a[0] = 1 of the predictor
// polynomial A(z) = sum a_k z^-k. Throws MetricError for a zero-energy frame.
Eigen::VectorXd lpc(const Eigen::VectorXd& frame, Index order);
Eigen::VectorXd lpc_from_autocorrelation(const Eigen::VectorXd& r);

// Cepstrum c[1..count] of 1 / A(z) by the standard recursion.
Eigen::VectorXd lpc_cepstrum(const Eigen::VectorXd& a, Index count);

// Per-frame values used by llr() / cd(), before trimming (one per analysed
// frame, silent reference frames removed).
Eigen::VectorXd llr_frames(const Waveform& x, const Waveform& y, const MetricConfig& cfg = {});
Eigen::VectorXd cd_frames(const Waveform& x, const Waveform& y, const MetricConfig& cfg = {});

// Mean of the smallest round(fraction * n) values (at least one).
double best_fraction_mean(Eigen::VectorXd values, double fraction);

// Band centres (Hz) and widths used by fwsegsnr.
struct MelBands {
  Eigen::VectorXd center;
  Eigen::VectorXd width;
};
MelBands mel_bands(Index count, double sample_rate);

// External PESQ scorer: `<executable> <clean.wav> <test.wav>` prints one
// decimal score on stdout.
class PesqProvider {
 public:
  PesqProvider() = default;
  explicit PesqProvider(std::string executable) : exe_(std::move(executable)) {}

  bool available() const { return !exe_.empty(); }
  double score(const Waveform& clean, const Waveform& test) const;
  double score_files(const std::string& clean_wav, const std::string& test_wav) const;

 private:
  std::string exe_;
};

// Discriminator target for one (clean, enhanced) pair. PESQ mode without an
// available provider is an error.
QualityScore quality_for_disc(const Waveform& clean, const Waveform& test,
                              QualityKind kind, const PesqProvider* provider = nullptr,
                              const MetricConfig& cfg = {});

}  // namespace cmgan

#endif  // CMGAN_METRICS_HPP_
