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

#include "reference.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmgan::reference {
namespace {

const double kPi = std::acos(-1.0);

// Mirror index without repeating the edge sample.
long mirror(long i, long n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

double mean_of_smallest(std::vector<double> v, double fraction) {
  std::sort(v.begin(), v.end());
  long keep = std::lround(fraction * double(v.size()));
  keep = std::max(1L, std::min(keep, long(v.size())));
  double s = 0;
  for (long i = 0; i < keep; ++i) s += v[i];
  return s / double(keep);
}

Vec autocorr(const Vec& f, long order) {
  Vec r = Vec::Zero(order + 1);
  for (long k = 0; k <= order; ++k)
    for (long n = k; n < f.size(); ++n) r[k] += f[n] * f[n - k];
  return r;
}

Eigen::MatrixXd toeplitz(const Vec& r, long n) {
  Eigen::MatrixXd m(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) m(i, j) = r[std::abs(i - j)];
  return m;
}

template <typename Fn>
std::vector<double> lpc_frames(const Vec& x, const Vec& y, const LpcOptions& o,
                               double clip, Fn fn) {
  const long frame = std::min<long>(o.frame, x.size());
  const long hop = std::max(1L, frame / 4);
  const Vec win = cosine_window(frame, 0.5);
  std::vector<double> out;
  for (long s = 0; s + frame <= x.size(); s += hop) {
    const Vec fx = x.segment(s, frame).cwiseProduct(win);
    const Vec fy = y.segment(s, frame).cwiseProduct(win);
    if (fx.squaredNorm() == 0.0) continue;
    double v = clip;
    if (fy.squaredNorm() > 0.0) v = fn(fx, lpc(fx, o.order), lpc(fy, o.order));
    out.push_back(std::min(std::max(v, 0.0), clip));
  }
  if (out.empty()) throw std::invalid_argument("reference: no voiced frames");
  return out;
}

}  // namespace

std::vector<std::complex<double>> dft(const Vec& x, long n_fft) {
  std::vector<std::complex<double>> out(n_fft / 2 + 1);
  std::vector<double> c(n_fft), s(n_fft);
  for (long m = 0; m < n_fft; ++m) {
    c[m] = std::cos(2.0 * kPi * double(m) / double(n_fft));
    s[m] = std::sin(2.0 * kPi * double(m) / double(n_fft));
  }
  const long len = std::min<long>(x.size(), n_fft);
  for (long k = 0; k <= n_fft / 2; ++k) {
    double re = 0, im = 0;
    for (long n = 0; n < len; ++n) {
      const long m = (k * n) % n_fft;
      re += x[n] * c[m];
      im -= x[n] * s[m];
    }
    out[k] = {re, im};
  }
  return out;
}

Vec cosine_window(long n, double a0) {
  Vec w(n);
  for (long i = 0; i < n; ++i) w[i] = a0 - (1.0 - a0) * std::cos(2.0 * kPi * i / double(n));
  return w;
}

std::vector<std::complex<double>> stft_frame(const Vec& x, long frame, long hop,
                                             long n_fft, double window_a0) {
  const Vec w = cosine_window(n_fft, window_a0);
  Vec seg(n_fft);
  for (long n = 0; n < n_fft; ++n)
    seg[n] = w[n] * x[mirror(frame * hop + n - n_fft / 2, x.size())];
  return dft(seg, n_fft);
}

double snr(const Vec& x, const Vec& y, double ceiling) {
  double ps = 0, pn = 0;
  for (long i = 0; i < x.size(); ++i) {
    ps += x[i] * x[i];
    pn += (x[i] - y[i]) * (x[i] - y[i]);
  }
  return pn == 0.0 ? ceiling : 10.0 * std::log10(ps / pn);
}

double ssnr(const Vec& x, const Vec& y, long frame, long hop, double lo, double hi) {
  double total = 0;
  long count = 0;
  for (long s = 0; s + frame <= x.size(); s += hop) {
    double ps = 0, pn = 0;
    for (long i = s; i < s + frame; ++i) {
      ps += x[i] * x[i];
      pn += (x[i] - y[i]) * (x[i] - y[i]);
    }
    if (ps == 0.0) continue;
    const double v = pn == 0.0 ? hi : 10.0 * std::log10(ps / pn);
    total += std::min(std::max(v, lo), hi);
    ++count;
  }
  return total / double(count);
}

double lsd(const Vec& x, const Vec& y, long n_fft, long hop, bool base10, double floor) {
  const long frames = x.size() / hop + 1;
  double total = 0;
  for (long t = 0; t < frames; ++t) {
    const auto fx = stft_frame(x, t, hop, n_fft, 0.5);
    const auto fy = stft_frame(y, t, hop, n_fft, 0.5);
    double acc = 0;
    for (std::size_t k = 0; k < fx.size(); ++k) {
      const double px = std::max(std::norm(fx[k]), floor);
      const double py = std::max(std::norm(fy[k]), floor);
      const double d = base10 ? std::log10(px) - std::log10(py) : std::log(px) - std::log(py);
      acc += d * d;
    }
    total += std::sqrt(acc / double(fx.size()));
  }
  return total / double(frames);
}

Vec lpc(const Vec& frame, long order) {
  const Vec r = autocorr(frame, order);
  if (r[0] == 0.0) throw std::invalid_argument("reference lpc: zero frame");
  Vec a(order + 1);
  a[0] = 1.0;
  if (order > 0)
    a.tail(order) = toeplitz(r, order).ldlt().solve(-r.tail(order));
  return a;
}

Vec lpc_cepstrum(const Vec& a, long count, long grid) {
  std::vector<double> c_tab(grid), s_tab(grid);
  for (long m = 0; m < grid; ++m) {
    c_tab[m] = std::cos(2.0 * kPi * double(m) / double(grid));
    s_tab[m] = std::sin(2.0 * kPi * double(m) / double(grid));
  }
  Vec c = Vec::Zero(count);
  for (long k = 0; k < grid; ++k) {
    double re = 0, im = 0;
    for (long m = 0; m < a.size(); ++m) {
      re += a[m] * c_tab[(k * m) % grid];
      im -= a[m] * s_tab[(k * m) % grid];
    }
    const double log_power = -std::log(re * re + im * im);
    for (long n = 1; n <= count; ++n) c[n - 1] += log_power * c_tab[(k * n) % grid];
  }
  // The inverse transform of log|H|^2 equals the cepstrum of H (minimum phase).
  return c / double(grid);
}

double llr(const Vec& x, const Vec& y, const LpcOptions& o) {
  return mean_of_smallest(
      lpc_frames(x, y, o, o.llr_clip,
                 [&](const Vec& fx, const Vec& ax, const Vec& ay) {
                   const Eigen::MatrixXd r = toeplitz(autocorr(fx, o.order), o.order + 1);
                   const double num = ay.transpose() * r * ay;
                   const double den = ax.transpose() * r * ax;
                   return std::log(num / den);
                 }),
      o.best_fraction);
}

double cd(const Vec& x, const Vec& y, const LpcOptions& o) {
  return mean_of_smallest(
      lpc_frames(x, y, o, o.cd_clip,
                 [&](const Vec&, const Vec& ax, const Vec& ay) {
                   const Vec d = lpc_cepstrum(ax, o.order) - lpc_cepstrum(ay, o.order);
                   return 10.0 / std::log(10.0) * std::sqrt(2.0 * d.squaredNorm());
                 }),
      o.best_fraction);
}

double fwsegsnr(const Vec& x, const Vec& y, double sample_rate, long frame,
                long bands, double exponent, double lo, double hi) {
  frame = std::min<long>(frame, x.size());
  const long hop = std::max(1L, frame / 4);
  long n_fft = 1;
  while (n_fft < 2 * frame) n_fft *= 2;
  // Mel-spaced centres; each band spans the two neighbouring centres.
  const double mel_top = 2595.0 * std::log10(1.0 + sample_rate / 2.0 / 700.0);
  std::vector<double> edge(bands + 2);
  for (long i = 0; i < bands + 2; ++i)
    edge[i] = 700.0 * (std::pow(10.0, mel_top * i / double(bands + 1) / 2595.0) - 1.0);

  const Vec win = cosine_window(frame, 0.5);
  double total = 0;
  long count = 0;
  for (long s = 0; s + frame <= x.size(); s += hop) {
    const auto fx = dft(x.segment(s, frame).cwiseProduct(win), n_fft);
    const auto fy = dft(y.segment(s, frame).cwiseProduct(win), n_fft);
    double num = 0, den = 0;
    for (long j = 0; j < bands; ++j) {
      const double centre = edge[j + 1], width = edge[j + 2] - edge[j];
      double bx = 0, by = 0;
      for (long k = 0; k <= n_fft / 2; ++k) {
        const double f = k * sample_rate / double(n_fft);
        const double g = std::exp(-11.0 * std::pow((f - centre) / width, 2));
        bx += g * std::abs(fx[k]);
        by += g * std::abs(fy[k]);
      }
      const double w = std::pow(bx, exponent);
      if (w == 0.0) continue;
      const double e = (bx - by) * (bx - by);
      num += w * (e == 0.0 ? INFINITY : 10.0 * std::log10(bx * bx / e));
      den += w;
    }
    if (den == 0.0) continue;
    total += std::min(std::max(num / den, lo), hi);
    ++count;
  }
  return total / double(count);
}

double schroeder_t60(const Vec& h, double sample_rate) {
  const long n = h.size();
  Vec edc(n);
  double acc = 0;
  for (long i = n - 1; i >= 0; --i) {
    acc += h[i] * h[i];
    edc[i] = acc;
  }
  // Least-squares line through (t, dB) for -5 dB >= EDC >= -35 dB.
  double st = 0, sd = 0, stt = 0, std_ = 0;
  long m = 0;
  for (long i = 0; i < n; ++i) {
    const double db = 10.0 * std::log10(edc[i] / edc[0]);
    if (db > -5.0 || db < -35.0) continue;
    const double t = i / sample_rate;
    st += t;
    sd += db;
    stt += t * t;
    std_ += t * db;
    ++m;
  }
  if (m < 2) throw std::invalid_argument("reference: decay range not reached");
  const double slope = (m * std_ - st * sd) / (m * stt - st * st);
  return -60.0 / slope;
}

double band_energy(const Vec& x_in, double sample_rate, double from_hz, double to_hz,
                   bool taper) {
  const long n = x_in.size();
  const Vec x = taper ? Vec(x_in.cwiseProduct(cosine_window(n, 0.5))) : x_in;
  std::vector<double> c(n), s(n);
  for (long m = 0; m < n; ++m) {
    c[m] = std::cos(2.0 * kPi * double(m) / double(n));
    s[m] = std::sin(2.0 * kPi * double(m) / double(n));
  }
  double e = 0;
  for (long k = 0; k <= n / 2; ++k) {
    const double f = k * sample_rate / double(n);
    if (f < from_hz || f > to_hz) continue;
    double re = 0, im = 0;
    for (long i = 0; i < n; ++i) {
      const long m = (k * i) % n;
      re += x[i] * c[m];
      im -= x[i] * s[m];
    }
    e += re * re + im * im;
  }
  return e;
}

}  // namespace cmgan::reference
