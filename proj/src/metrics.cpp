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

#include "cmgan/metrics.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>
#include <vector>

#include "cmgan/dsp.hpp"

namespace cmgan {
namespace {

void check_pair(const Waveform& x, const Waveform& y, const char* what) {
  if (x.sample_rate != y.sample_rate)
    throw MetricError(std::string(what) + ": sample rates differ");
  if (x.size() != y.size())
    throw MetricError(std::string(what) + ": lengths differ (" +
                      std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  if (x.size() == 0) throw MetricError(std::string(what) + ": empty signals");
}

Index samples_for(double seconds, int rate) {
  return std::max<Index>(1, static_cast<Index>(std::lround(seconds * rate)));
}

// Hann-windowed analysis frames shared by the LPC metrics and fwsegsnr.
struct FrameGrid {
  Index length;
  Index hop;
  Index count;
};

FrameGrid lpc_grid(Index signal_len, int rate, const MetricConfig& cfg) {
  FrameGrid g;
  g.length = std::min(samples_for(cfg.lpc_frame_seconds, rate), signal_len);
  g.hop = std::max<Index>(1, g.length / 4);
  g.count = (signal_len - g.length) / g.hop + 1;
  return g;
}

Eigen::VectorXd windowed(const Eigen::VectorXd& x, Index start, const Eigen::VectorXd& win) {
  return x.segment(start, win.size()).cwiseProduct(win);
}

Eigen::MatrixXd toeplitz(const Eigen::VectorXd& r) {
  const Index n = r.size();
  Eigen::MatrixXd m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = r[std::abs(i - j)];
  return m;
}

template <typename Fn>
Eigen::VectorXd lpc_frame_values(const Waveform& x, const Waveform& y,
                                 const MetricConfig& cfg, double clip, Fn&& per_frame) {
  const FrameGrid g = lpc_grid(x.size(), x.sample_rate, cfg);
  const Eigen::VectorXd win = make_window(WindowType::kHann, g.length);
  std::vector<double> values;
  for (Index f = 0; f < g.count; ++f) {
    const Eigen::VectorXd rx = autocorrelation(windowed(x.samples, f * g.hop, win), cfg.lpc_order);
    if (rx[0] <= 0.0) continue;
    const Eigen::VectorXd ry = autocorrelation(windowed(y.samples, f * g.hop, win), cfg.lpc_order);
    double v = clip;
    if (ry[0] > 0.0) v = per_frame(rx, lpc_from_autocorrelation(rx), lpc_from_autocorrelation(ry));
    values.push_back(std::clamp(v, 0.0, clip));
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), Index(values.size()));
}

}  // namespace

void MetricConfig::validate() const {
  if (ssnr_floor >= ssnr_ceil || fw_floor >= fw_ceil)
    throw MetricError("metric config: clamp range is empty");
  if (llr_clip <= 0 || cd_clip <= 0) throw MetricError("metric config: clip must be positive");
  if (!(best_fraction > 0.0 && best_fraction <= 1.0))
    throw MetricError("metric config: best_fraction outside (0, 1]");
  if (lpc_order < 0) throw MetricError("metric config: negative LPC order");
  if (lsd_hop <= 0 || lsd_hop > lsd_window) throw MetricError("metric config: bad LSD framing");
  if (fw_bands <= 0) throw MetricError("metric config: need at least one band");
}

double snr(const Waveform& x, const Waveform& y, const MetricConfig& cfg) {
  check_pair(x, y, "snr");
  const double signal = x.samples.squaredNorm();
  const double noise = (x.samples - y.samples).squaredNorm();
  if (noise == 0.0) return cfg.snr_ceiling;
  if (signal == 0.0) throw MetricError("snr: reference has zero energy");
  return 10.0 * std::log10(signal / noise);
}

double ssnr(const Waveform& x, const Waveform& y, const MetricConfig& cfg) {
  check_pair(x, y, "ssnr");
  cfg.validate();
  const Index len = x.size();
  const Index frame = std::min(samples_for(cfg.ssnr_frame_seconds, x.sample_rate), len);
  const Index hop = samples_for(cfg.ssnr_hop_seconds, x.sample_rate);
  double sum = 0.0;
  Index used = 0;
  for (Index s = 0; s + frame <= len; s += hop) {
    const double signal = x.samples.segment(s, frame).squaredNorm();
    if (signal == 0.0) continue;
    const double noise = (x.samples.segment(s, frame) - y.samples.segment(s, frame)).squaredNorm();
    const double db = noise == 0.0 ? cfg.ssnr_ceil : 10.0 * std::log10(signal / noise);
    sum += std::clamp(db, cfg.ssnr_floor, cfg.ssnr_ceil);
    ++used;
  }
  if (used == 0) throw MetricError("ssnr: reference is silent");
  return sum / double(used);
}

double lsd(const Waveform& x, const Waveform& y, LogBase base, const MetricConfig& cfg) {
  check_pair(x, y, "lsd");
  cfg.validate();
  StftConfig sc;
  sc.window_len = sc.fft_size = cfg.lsd_window;
  sc.hop = cfg.lsd_hop;
  sc.window = WindowType::kHann;
  const Spectrogram sx = stft(x, sc), sy = stft(y, sc);
  const double scale = base == LogBase::kTen ? 1.0 / std::log(10.0) : 1.0;
  const Eigen::ArrayXXd px = (sx.real.square() + sx.imag.square()).max(cfg.lsd_power_floor);
  const Eigen::ArrayXXd py = (sy.real.square() + sy.imag.square()).max(cfg.lsd_power_floor);
  const Eigen::ArrayXXd d = (px.log() - py.log()) * scale;
  return d.square().rowwise().mean().sqrt().mean();
}

Eigen::VectorXd autocorrelation(const Eigen::VectorXd& frame, Index order) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(order + 1);
  const Index n = frame.size();
  for (Index k = 0; k <= order && k < n; ++k)
    r[k] = frame.head(n - k).dot(frame.tail(n - k));
  return r;
}

Eigen::VectorXd lpc_from_autocorrelation(const Eigen::VectorXd& r) {
  const Index order = r.size() - 1;
  if (order < 0) throw MetricError("lpc: empty autocorrelation");
  if (!(r[0] > 0.0)) throw MetricError("lpc: frame has zero energy");
  Eigen::VectorXd a = Eigen::VectorXd::Zero(order + 1);
  a[0] = 1.0;
  double err = r[0];
  Eigen::VectorXd prev;
  for (Index i = 1; i <= order; ++i) {
    double acc = r[i];
    for (Index j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    prev = a;
    for (Index j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    err *= 1.0 - k * k;
    if (err <= 0.0) break;
  }
  return a;
}

Eigen::VectorXd lpc(const Eigen::VectorXd& frame, Index order) {
  if (order < 0) throw MetricError("lpc: negative order");
  return lpc_from_autocorrelation(autocorrelation(frame, order));
}

Eigen::VectorXd lpc_cepstrum(const Eigen::VectorXd& a, Index count) {
  const Index p = a.size() - 1;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(count + 1);
  for (Index n = 1; n <= count; ++n) {
    double acc = n <= p ? -a[n] : 0.0;
    for (Index k = std::max<Index>(1, n - p); k < n; ++k)
      acc -= double(k) / double(n) * c[k] * a[n - k];
    c[n] = acc;
  }
  return c.tail(count);
}

double best_fraction_mean(Eigen::VectorXd values, double fraction) {
  if (values.size() == 0) throw MetricError("no frames to aggregate");
  std::sort(values.data(), values.data() + values.size());
  const Index keep = std::clamp<Index>(
      static_cast<Index>(std::lround(fraction * double(values.size()))), 1, values.size());
  return values.head(keep).mean();
}

Eigen::VectorXd llr_frames(const Waveform& x, const Waveform& y, const MetricConfig& cfg) {
  check_pair(x, y, "llr");
  cfg.validate();
  return lpc_frame_values(x, y, cfg, cfg.llr_clip,
                          [](const Eigen::VectorXd& rx, const Eigen::VectorXd& ax,
                             const Eigen::VectorXd& ay) {
                            const Eigen::MatrixXd r = toeplitz(rx);
                            return std::log(ay.dot(r * ay) / ax.dot(r * ax));
                          });
}

Eigen::VectorXd cd_frames(const Waveform& x, const Waveform& y, const MetricConfig& cfg) {
  check_pair(x, y, "cd");
  cfg.validate();
  const Index p = cfg.lpc_order;
  return lpc_frame_values(x, y, cfg, cfg.cd_clip,
                          [p](const Eigen::VectorXd&, const Eigen::VectorXd& ax,
                              const Eigen::VectorXd& ay) {
                            const Eigen::VectorXd d = lpc_cepstrum(ax, p) - lpc_cepstrum(ay, p);
                            return 10.0 / std::log(10.0) * std::sqrt(2.0 * d.squaredNorm());
                          });
}

double llr(const Waveform& x, const Waveform& y, const MetricConfig& cfg) {
  return best_fraction_mean(llr_frames(x, y, cfg), cfg.best_fraction);
}

double cd(const Waveform& x, const Waveform& y, const MetricConfig& cfg) {
  return best_fraction_mean(cd_frames(x, y, cfg), cfg.best_fraction);
}

MelBands mel_bands(Index count, double sample_rate) {
  auto to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto to_hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double top = to_mel(sample_rate / 2.0);
  Eigen::VectorXd edges(count + 2);
  for (Index i = 0; i < count + 2; ++i) edges[i] = to_hz(top * double(i) / double(count + 1));
  MelBands b;
  b.center = edges.segment(1, count);
  b.width = edges.tail(count) - edges.head(count);
  return b;
}

double fwsegsnr(const Waveform& x, const Waveform& y, const MetricConfig& cfg) {
  check_pair(x, y, "fwsegsnr");
  cfg.validate();
  const FrameGrid g = lpc_grid(x.size(), x.sample_rate, cfg);
  Index nfft = 1;
  while (nfft < 2 * g.length) nfft *= 2;
  const Index bins = nfft / 2 + 1;
  const MelBands bands = mel_bands(cfg.fw_bands, x.sample_rate);
  Eigen::MatrixXd gain(cfg.fw_bands, bins);
  for (Index j = 0; j < cfg.fw_bands; ++j)
    for (Index k = 0; k < bins; ++k) {
      const double f = double(k) * x.sample_rate / double(nfft);
      const double u = (f - bands.center[j]) / bands.width[j];
      gain(j, k) = std::exp(-11.0 * u * u);
    }

  const Eigen::VectorXd win = make_window(WindowType::kHann, g.length);
  RealFft fft(nfft);
  Eigen::VectorXd buf = Eigen::VectorXd::Zero(nfft);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(bins));
  auto band_magnitudes = [&](const Eigen::VectorXd& s, Index start) {
    buf.head(g.length) = windowed(s, start, win);
    fft.forward(buf.data(), spec.data());
    Eigen::VectorXd mag(bins);
    for (Index k = 0; k < bins; ++k) mag[k] = std::abs(spec[static_cast<std::size_t>(k)]);
    return Eigen::VectorXd(gain * mag);
  };

  double sum = 0.0;
  Index used = 0;
  for (Index f = 0; f < g.count; ++f) {
    const Eigen::VectorXd bx = band_magnitudes(x.samples, f * g.hop);
    const Eigen::VectorXd by = band_magnitudes(y.samples, f * g.hop);
    double num = 0.0, den = 0.0;
    for (Index j = 0; j < cfg.fw_bands; ++j) {
      const double w = std::pow(bx[j], cfg.fw_weight_exponent);
      if (w == 0.0) continue;
      const double noise = (bx[j] - by[j]) * (bx[j] - by[j]);
      num += w * (noise == 0.0 ? std::numeric_limits<double>::infinity()
                               : 10.0 * std::log10(bx[j] * bx[j] / noise));
      den += w;
    }
    if (den == 0.0) continue;
    sum += std::clamp(num / den, cfg.fw_floor, cfg.fw_ceil);
    ++used;
  }
  if (used == 0) throw MetricError("fwsegsnr: reference is silent");
  return sum / double(used);
}

double PesqProvider::score_files(const std::string& clean_wav,
                                 const std::string& test_wav) const {
  if (!available()) throw MetricError("PESQ provider not configured");
  auto quote = [](const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
  };
  const std::string cmd = quote(exe_) + " " + quote(clean_wav) + " " + quote(test_wav);
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw MetricError("cannot run PESQ provider " + exe_);
  std::string out;
  char chunk[256];
  while (std::fgets(chunk, sizeof chunk, pipe)) out += chunk;
  const int status = ::pclose(pipe);
  if (status != 0)
    throw MetricError("PESQ provider " + exe_ + " failed with status " + std::to_string(status));
  try {
    std::size_t used = 0;
    const double v = std::stod(out, &used);
    if (out.find_first_not_of(" \t\r\n", used) != std::string::npos) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw MetricError("PESQ provider printed '" + out + "', expected one number");
  }
}

double PesqProvider::score(const Waveform& clean, const Waveform& test) const {
  if (!available()) throw MetricError("PESQ provider not configured");
  namespace fs = std::filesystem;
  static std::atomic<unsigned> counter{0};
  const std::string stem = "cmgan_pesq_" + std::to_string(::getpid()) + "_" +
                           std::to_string(counter++);
  const fs::path dir = fs::temp_directory_path();
  const std::string a = (dir / (stem + "_ref.wav")).string();
  const std::string b = (dir / (stem + "_deg.wav")).string();
  write_wav(clean, a);
  write_wav(test, b);
  struct Cleanup {
    std::string a, b;
    ~Cleanup() {
      std::error_code ec;
      fs::remove(a, ec);
      fs::remove(b, ec);
    }
  } cleanup{a, b};
  return score_files(a, b);
}

QualityScore quality_for_disc(const Waveform& clean, const Waveform& test,
                              QualityKind kind, const PesqProvider* provider,
                              const MetricConfig& cfg) {
  if (kind == QualityKind::kLlr) return normalize_quality(llr(clean, test, cfg), kind);
  if (!provider || !provider->available())
    throw MetricError("quality kind 'pesq' needs an external PESQ provider (--pesq-provider)");
  return normalize_quality(provider->score(clean, test), kind);
}

}  // namespace cmgan
