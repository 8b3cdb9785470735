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

// Slow, direct-formula implementations used as test oracles. Nothing here
// calls into the main library: DFTs are evaluated term by term, LPC systems
// are solved as dense matrices, cepstra come from a sampled log spectrum.

#ifndef CMGAN_REFERENCE_HPP_
#define CMGAN_REFERENCE_HPP_

#include <Eigen/Core>

#include <complex>
#include <vector>

namespace cmgan::reference {

using Vec = Eigen::VectorXd;

// X[k] = sum_n x[n] exp(-2 pi i k n / n_fft) for k = 0..n_fft/2; x is
// zero-padded to n_fft.
std::vector<std::complex<double>> dft(const Vec& x, long n_fft);

// Periodic window: a0 - (1 - a0) cos(2 pi n / N).
Vec cosine_window(long n, double a0);

// One frame of a centered STFT (reflection padding of n_fft / 2) computed by
// direct DFT.
std::vector<std::complex<double>> stft_frame(const Vec& x, long frame, long hop,
                                             long n_fft, double window_a0);

double snr(const Vec& x, const Vec& y, double ceiling = 100.0);
double ssnr(const Vec& x, const Vec& y, long frame, long hop, double lo, double hi);
double lsd(const Vec& x, const Vec& y, long n_fft, long hop, bool base10,
           double floor = 1e-10);

// Normal equations R a = -r solved densely; returns a[0..order], a[0] = 1.
Vec lpc(const Vec& frame, long order);

struct LpcOptions {
  long order = 16;
  long frame = 480;
  double llr_clip = 2.0;
  double cd_clip = 10.0;
  double best_fraction = 0.95;
};
double llr(const Vec& x, const Vec& y, const LpcOptions& o = {});
double cd(const Vec& x, const Vec& y, const LpcOptions& o = {});

// Cepstrum c[1..count] of 1 / A(z) from -log|A(e^jw)|^2 on a dense grid.
Vec lpc_cepstrum(const Vec& a, long count, long grid = 32768);

double fwsegsnr(const Vec& x, const Vec& y, double sample_rate, long frame = 480,
                long bands = 25, double exponent = 0.2, double lo = -10.0,
                double hi = 35.0);

// Reverberation time from Schroeder backward integration, by a straight-line
// fit of the decay curve between -5 and -35 dB extrapolated to -60 dB.
double schroeder_t60(const Vec& h, double sample_rate);

// Energy of x between `from_hz` and `to_hz` (direct DFT over the whole
// signal). With `taper`, a periodic Hann window is applied first so that the
// track edges do not leak into distant bins.
double band_energy(const Vec& x, double sample_rate, double from_hz, double to_hz,
                   bool taper = true);

}  // namespace cmgan::reference

#endif  // CMGAN_REFERENCE_HPP_
