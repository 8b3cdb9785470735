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

// STFT analysis/synthesis, power-law compression, input packing and
// integer-ratio resampling. Everything here runs in double precision.

#ifndef CMGAN_DSP_HPP_
#define CMGAN_DSP_HPP_

#include <Eigen/Core>

#include <complex>
#include <memory>
#include <vector>

#include "cmgan/audio_io.hpp"
#include "cmgan/nn/tensor.hpp"

namespace cmgan {

enum class WindowType { kHamming, kHann };

// Periodic (DFT-even) window of length n.
Eigen::VectorXd make_window(WindowType type, Index n);

struct StftConfig {
  Index window_len = 400;
  Index hop = 100;
  Index fft_size = 400;
  WindowType window = WindowType::kHamming;
  bool center = true;

  // Throws std::invalid_argument on hop > window_len > fft_size violations.
  void validate() const;
  Index bins() const { return fft_size / 2 + 1; }
  Index frames(Index length) const;
  // Analysis window zero-padded (centered) to fft_size.
  Eigen::VectorXd padded_window() const;

  bool operator==(const StftConfig&) const = default;
};

// Complex T x F grid stored as separate real and imaginary planes.
struct Spectrogram {
  Eigen::ArrayXXd real;
  Eigen::ArrayXXd imag;
  int sample_rate = 16000;
  StftConfig config;

  Index frames() const { return real.rows(); }
  Index bins() const { return real.cols(); }
  Eigen::ArrayXXd magnitude() const;
  Eigen::ArrayXXd phase() const;
};

// Real FFT of a fixed size returning bins 0..n/2.
class RealFft {
 public:
  explicit RealFft(Index n);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  Index size() const { return n_; }
  void forward(const double* in, std::complex<double>* out);
  // Inverse of forward (1/n scaled); imaginary parts of DC and Nyquist are
  // ignored.
  void inverse(const std::complex<double>* in, double* out);

 private:
  struct Impl;
  Index n_;
  std::unique_ptr<Impl> impl_;
};

Spectrogram stft(const Waveform& w, const StftConfig& cfg = {});

// Weighted overlap-add, normalized by the summed squared window, cropped to
// out_len samples (the centering pad is removed).
Waveform istft(const Spectrogram& s, Index out_len);
Waveform istft(const Spectrogram& s, const StftConfig& cfg, Index out_len);

// Adjoint of istft: maps dL/d(waveform) to dL/d(real), dL/d(imag).
void istft_adjoint(const Eigen::VectorXd& grad, const StftConfig& cfg,
                   Index frames, Eigen::ArrayXXd& grad_real,
                   Eigen::ArrayXXd& grad_imag);

constexpr double kCompressExponent = 0.3;

// |Y| -> |Y|^c with the phase untouched; 0^c = 0.
Spectrogram compress(const Spectrogram& s, double c = kCompressExponent);
Spectrogram decompress(const Spectrogram& s, double c = kCompressExponent);

// B x T x F x 3 tensor with channels (magnitude, real, imaginary).
template <typename Scalar>
Tensor<Scalar> pack_input(const std::vector<Spectrogram>& batch);
template <typename Scalar>
Tensor<Scalar> pack_input(const Spectrogram& s) {
  return pack_input<Scalar>(std::vector<Spectrogram>{s});
}

// Integer-ratio rate conversion with a Kaiser-windowed sinc low-pass.
struct ResampleConfig {
  double stopband_db = 60.0;
  // Fractions of the lower rate's Nyquist frequency.
  double pass_edge = 0.9;
  double stop_edge = 1.0;
};

// Low-pass taps h[-K..K] for a filter running at `high_rate` whose band edge
// is the Nyquist frequency of `low_rate`; sum(h) == 1.
Eigen::VectorXd resample_filter(int high_rate, int low_rate,
                                const ResampleConfig& cfg = {});

// Length becomes floor(len * to / from). Throws std::invalid_argument unless
// one rate divides the other.
Waveform resample(const Waveform& w, int to_hz, const ResampleConfig& cfg = {});

}  // namespace cmgan

#endif  // CMGAN_DSP_HPP_
