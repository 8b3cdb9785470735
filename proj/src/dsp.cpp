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

#include "cmgan/dsp.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cmgan {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Envelope values below this are treated as uncovered samples.
constexpr double kEnvelopeFloor = 1e-11;

// Index into x reflected about its end samples (no edge repeat), valid for
// any offset.
Index reflect_index(Index i, Index len) {
  if (len == 1) return 0;
  const Index period = 2 * (len - 1);
  i %= period;
  if (i < 0) i += period;
  return i < len ? i : period - i;
}

Index center_pad(const StftConfig& cfg) { return cfg.center ? cfg.fft_size / 2 : 0; }

// Sum of squared analysis windows over the padded signal.
Eigen::VectorXd window_envelope(const StftConfig& cfg, Index frames) {
  const Eigen::VectorXd win = cfg.padded_window();
  Eigen::VectorXd env = Eigen::VectorXd::Zero((frames - 1) * cfg.hop + cfg.fft_size);
  for (Index t = 0; t < frames; ++t)
    env.segment(t * cfg.hop, cfg.fft_size) += win.cwiseAbs2();
  return env;
}

}  // namespace

Eigen::VectorXd make_window(WindowType type, Index n) {
  Eigen::VectorXd w(n);
  const double a0 = type == WindowType::kHamming ? 0.54 : 0.5;
  for (Index i = 0; i < n; ++i)
    w[i] = a0 - (1.0 - a0) * std::cos(kTwoPi * double(i) / double(n));
  return w;
}

void StftConfig::validate() const {
  if (window_len <= 0) throw std::invalid_argument("stft: window_len must be positive");
  if (hop <= 0 || hop > window_len)
    throw std::invalid_argument("stft: hop must be in [1, window_len]");
  if (window_len > fft_size) throw std::invalid_argument("stft: window_len exceeds fft_size");
}

Index StftConfig::frames(Index length) const {
  if (center) return length / hop + 1;
  return length < fft_size ? 0 : (length - fft_size) / hop + 1;
}

Eigen::VectorXd StftConfig::padded_window() const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(fft_size);
  w.segment((fft_size - window_len) / 2, window_len) = make_window(window, window_len);
  return w;
}

Eigen::ArrayXXd Spectrogram::magnitude() const {
  return (real.square() + imag.square()).sqrt();
}

Eigen::ArrayXXd Spectrogram::phase() const {
  return imag.binaryExpr(real, [](double i, double r) { return std::atan2(i, r); });
}

struct RealFft::Impl {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> buf;
};

RealFft::RealFft(Index n) : n_(n), impl_(std::make_unique<Impl>()) {
  impl_->fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  impl_->buf.resize(static_cast<std::size_t>(n / 2 + 1));
}
RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(const double* in, std::complex<double>* out) {
  impl_->fft.fwd(out, in, n_);
}

void RealFft::inverse(const std::complex<double>* in, double* out) {
  auto& buf = impl_->buf;
  std::copy(in, in + n_ / 2 + 1, buf.begin());
  buf.front().imag(0.0);
  if (n_ % 2 == 0) buf.back().imag(0.0);
  impl_->fft.inv(out, buf.data(), n_);
}

Spectrogram stft(const Waveform& w, const StftConfig& cfg) {
  cfg.validate();
  if (w.samples.size() < 1) throw std::invalid_argument("stft: empty waveform");
  const Index len = w.samples.size(), n = cfg.fft_size, pad = center_pad(cfg);
  const Index frames = cfg.frames(len);
  if (frames < 1) throw std::invalid_argument("stft: waveform shorter than one frame");
  const Eigen::VectorXd win = cfg.padded_window();

  Spectrogram s;
  s.sample_rate = w.sample_rate;
  s.config = cfg;
  s.real.resize(frames, cfg.bins());
  s.imag.resize(frames, cfg.bins());
  RealFft fft(n);
  Eigen::VectorXd frame(n);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(cfg.bins()));
  for (Index t = 0; t < frames; ++t) {
    for (Index i = 0; i < n; ++i)
      frame[i] = win[i] * w.samples[reflect_index(t * cfg.hop + i - pad, len)];
    fft.forward(frame.data(), spec.data());
    for (Index k = 0; k < cfg.bins(); ++k) {
      s.real(t, k) = spec[static_cast<std::size_t>(k)].real();
      s.imag(t, k) = spec[static_cast<std::size_t>(k)].imag();
    }
  }
  return s;
}

Waveform istft(const Spectrogram& s, Index out_len) {
  const StftConfig& cfg = s.config;
  cfg.validate();
  if (s.real.rows() != s.imag.rows() || s.real.cols() != s.imag.cols())
    throw std::invalid_argument("istft: real/imag shape mismatch");
  if (s.bins() != cfg.bins())
    throw std::invalid_argument("istft: expected " + std::to_string(cfg.bins()) +
                                " bins, got " + std::to_string(s.bins()));
  if (out_len < 0) throw std::invalid_argument("istft: negative output length");
  const Index n = cfg.fft_size, frames = s.frames(), pad = center_pad(cfg);
  const Eigen::VectorXd win = cfg.padded_window();

  Waveform out;
  out.sample_rate = s.sample_rate;
  out.samples = Eigen::VectorXd::Zero(out_len);
  if (frames == 0) return out;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero((frames - 1) * cfg.hop + n);
  const Eigen::VectorXd env = window_envelope(cfg, frames);
  RealFft fft(n);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(cfg.bins()));
  Eigen::VectorXd frame(n);
  for (Index t = 0; t < frames; ++t) {
    for (Index k = 0; k < cfg.bins(); ++k)
      spec[static_cast<std::size_t>(k)] = {s.real(t, k), s.imag(t, k)};
    fft.inverse(spec.data(), frame.data());
    acc.segment(t * cfg.hop, n) += win.cwiseProduct(frame);
  }
  for (Index i = 0; i < out_len; ++i) {
    const Index j = i + pad;
    if (j < acc.size() && env[j] > kEnvelopeFloor) out.samples[i] = acc[j] / env[j];
  }
  return out;
}

Waveform istft(const Spectrogram& s, const StftConfig& cfg, Index out_len) {
  if (!(s.config == cfg)) throw std::invalid_argument("istft: config mismatch");
  return istft(s, out_len);
}

void istft_adjoint(const Eigen::VectorXd& grad, const StftConfig& cfg,
                   Index frames, Eigen::ArrayXXd& grad_real,
                   Eigen::ArrayXXd& grad_imag) {
  cfg.validate();
  const Index n = cfg.fft_size, pad = center_pad(cfg), bins = cfg.bins();
  grad_real.setZero(frames, bins);
  grad_imag.setZero(frames, bins);
  if (frames == 0) return;
  const Eigen::VectorXd win = cfg.padded_window();
  const Eigen::VectorXd env = window_envelope(cfg, frames);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(env.size());
  for (Index i = 0; i < grad.size(); ++i) {
    const Index j = i + pad;
    if (j < env.size() && env[j] > kEnvelopeFloor) g[j] = grad[i] / env[j];
  }
  RealFft fft(n);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(bins));
  Eigen::VectorXd frame(n);
  for (Index t = 0; t < frames; ++t) {
    frame = win.cwiseProduct(g.segment(t * cfg.hop, n));
    fft.forward(frame.data(), spec.data());
    for (Index k = 0; k < bins; ++k) {
      const bool edge = k == 0 || (n % 2 == 0 && k == bins - 1);
      const double scale = (edge ? 1.0 : 2.0) / double(n);
      grad_real(t, k) = scale * spec[static_cast<std::size_t>(k)].real();
      grad_imag(t, k) = edge ? 0.0 : scale * spec[static_cast<std::size_t>(k)].imag();
    }
  }
}

namespace {

Spectrogram power_law(const Spectrogram& s, double exponent) {
  Spectrogram out = s;
  for (Index t = 0; t < s.frames(); ++t)
    for (Index k = 0; k < s.bins(); ++k) {
      const double r = s.real(t, k), i = s.imag(t, k);
      const double mag = std::sqrt(r * r + i * i);
      const double gain = mag > 0.0 ? std::pow(mag, exponent - 1.0) : 0.0;
      out.real(t, k) = r * gain;
      out.imag(t, k) = i * gain;
    }
  return out;
}

}  // namespace

Spectrogram compress(const Spectrogram& s, double c) {
  if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("compress: exponent outside (0, 1]");
  return power_law(s, c);
}

Spectrogram decompress(const Spectrogram& s, double c) {
  if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("decompress: exponent outside (0, 1]");
  return power_law(s, 1.0 / c);
}

template <typename Scalar>
Tensor<Scalar> pack_input(const std::vector<Spectrogram>& batch) {
  if (batch.empty()) throw ShapeError("pack_input: empty batch");
  const Index t = batch.front().frames(), f = batch.front().bins();
  Tensor<Scalar> out({static_cast<Index>(batch.size()), t, f, 3});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Spectrogram& s = batch[b];
    if (s.frames() != t || s.bins() != f)
      throw ShapeError("pack_input: spectrograms differ in shape");
    for (Index i = 0; i < t; ++i)
      for (Index k = 0; k < f; ++k) {
        const double r = s.real(i, k), im = s.imag(i, k);
        Scalar* dst = &out(Index(b), i, k, 0);
        dst[0] = static_cast<Scalar>(std::sqrt(r * r + im * im));
        dst[1] = static_cast<Scalar>(r);
        dst[2] = static_cast<Scalar>(im);
      }
  }
  return out;
}

template Tensor<float> pack_input<float>(const std::vector<Spectrogram>&);
template Tensor<double> pack_input<double>(const std::vector<Spectrogram>&);

Eigen::VectorXd resample_filter(int high_rate, int low_rate,
                                const ResampleConfig& cfg) {
  const double nyquist = 0.5 * low_rate;
  const double cutoff = 0.5 * (cfg.pass_edge + cfg.stop_edge) * nyquist / high_rate;
  const double transition = kTwoPi * (cfg.stop_edge - cfg.pass_edge) * nyquist / high_rate;
  const double a = cfg.stopband_db;
  const double beta = a > 50.0   ? 0.1102 * (a - 8.7)
                      : a > 21.0 ? 0.5842 * std::pow(a - 21.0, 0.4) + 0.07886 * (a - 21.0)
                                 : 0.0;
  const auto half = static_cast<Index>(std::ceil((a - 7.95) / (2.285 * transition) / 2.0));
  Eigen::VectorXd h(2 * half + 1);
  const double norm = std::cyl_bessel_i(0.0, beta);
  for (Index k = -half; k <= half; ++k) {
    const double x = 2.0 * cutoff * double(k);
    const double sinc = k == 0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double r = half ? double(k) / double(half) : 0.0;
    const double kaiser = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
    h[k + half] = 2.0 * cutoff * sinc * kaiser;
  }
  return h / h.sum();
}

Waveform resample(const Waveform& w, int to_hz, const ResampleConfig& cfg) {
  validate(w);
  const int from_hz = w.sample_rate;
  if (to_hz <= 0) throw std::invalid_argument("resample: target rate must be positive");
  if (to_hz == from_hz) return w;
  const bool down = from_hz > to_hz;
  const int hi = down ? from_hz : to_hz, lo = down ? to_hz : from_hz;
  if (hi % lo)
    throw std::invalid_argument("resample: " + std::to_string(from_hz) + " -> " +
                                std::to_string(to_hz) + " is not an integer ratio");
  const Index ratio = hi / lo;
  const Eigen::VectorXd h = resample_filter(hi, lo, cfg);
  const Index half = (h.size() - 1) / 2, len = w.samples.size();
  const auto& x = w.samples;

  Waveform out;
  out.sample_rate = to_hz;
  if (down) {
    out.samples.resize(len / ratio);
    for (Index m = 0; m < out.samples.size(); ++m) {
      double acc = 0.0;
      for (Index k = -half; k <= half; ++k)
        acc += h[k + half] * x[reflect_index(m * ratio - k, len)];
      out.samples[m] = acc;
    }
    return out;
  }
  // Polyphase interpolation; each phase is normalized to unit DC gain.
  Eigen::VectorXd phase_sum = Eigen::VectorXd::Zero(ratio);
  for (Index k = -half; k <= half; ++k)
    phase_sum[((k % ratio) + ratio) % ratio] += h[k + half];
  out.samples.resize(len * ratio);
  for (Index n = 0; n < out.samples.size(); ++n) {
    const Index r = n % ratio;
    double acc = 0.0;
    // Inputs j with |n - j * ratio| <= half.
    const Index num = n - half;
    const Index j_lo = num >= 0 ? (num + ratio - 1) / ratio : -((-num) / ratio);
    for (Index j = j_lo; j * ratio <= n + half; ++j)
      acc += h[n - j * ratio + half] * x[reflect_index(j, len)];
    out.samples[n] = acc / phase_sum[r];
  }
  return out;
}

}  // namespace cmgan
