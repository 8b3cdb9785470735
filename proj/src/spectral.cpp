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

#include "cmgan/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace cmgan {

std::string to_string(MaskMode mode) {
  return mode == MaskMode::kMultiply ? "multiply" : "add";
}

MaskMode parse_mask_mode(const std::string& name) {
  if (name == "multiply") return MaskMode::kMultiply;
  if (name == "add") return MaskMode::kAdd;
  throw std::invalid_argument("unknown mask mode '" + name + "'");
}

MaskMode mask_mode_for(Task task) {
  return task == Task::kSuperres ? MaskMode::kAdd : MaskMode::kMultiply;
}

template <typename Scalar>
Recombined<Scalar> Recombiner<Scalar>::forward(const Tensor<Scalar>& mask,
                                               const Tensor<Scalar>& residual,
                                               const Tensor<Scalar>& packed) {
  require_rank(packed, 4, "Recombiner packed input");
  const Index b = packed.dim(0), t = packed.dim(1), f = packed.dim(2);
  require_shape(packed, {b, t, f, 3}, "Recombiner packed input");
  require_shape(mask, {b, t, f}, "Recombiner mask");
  require_shape(residual, {b, t, f, 2}, "Recombiner residual");

  const Index n = b * t * f;
  gain_ = Tensor<Scalar>({b, t, f});
  cos_ = Tensor<Scalar>({b, t, f});
  sin_ = Tensor<Scalar>({b, t, f});
  ri_ = Tensor<Scalar>({b, t, f, 2});
  mag_ = Tensor<Scalar>({b, t, f});
  for (Index k = 0; k < n; ++k) {
    const Scalar ym = packed[3 * k], yr = packed[3 * k + 1], yi = packed[3 * k + 2];
    const Scalar phase = std::atan2(yi, yr);
    cos_[k] = std::cos(phase);
    sin_[k] = std::sin(phase);
    Scalar base;
    if (mode_ == MaskMode::kMultiply) {
      gain_[k] = ym;
      base = mask[k] * ym;
    } else {
      gain_[k] = Scalar(1);
      base = mask[k] + ym;
    }
    const Scalar r = base * cos_[k] + residual[2 * k];
    const Scalar i = base * sin_[k] + residual[2 * k + 1];
    ri_[2 * k] = r;
    ri_[2 * k + 1] = i;
    mag_[k] = std::sqrt(r * r + i * i + Scalar(kMagnitudeEps));
  }
  return {ri_, mag_};
}

template <typename Scalar>
std::pair<Tensor<Scalar>, Tensor<Scalar>> Recombiner<Scalar>::backward(
    const Tensor<Scalar>& grad_ri, const Tensor<Scalar>& grad_mag) const {
  require_shape(grad_ri, ri_.shape(), "Recombiner grad_ri");
  require_shape(grad_mag, mag_.shape(), "Recombiner grad_mag");
  Tensor<Scalar> d_mask(mag_.shape()), d_res(ri_.shape());
  for (Index k = 0; k < mag_.size(); ++k) {
    const Scalar gm = grad_mag[k] / mag_[k];
    const Scalar gr = grad_ri[2 * k] + gm * ri_[2 * k];
    const Scalar gi = grad_ri[2 * k + 1] + gm * ri_[2 * k + 1];
    d_res[2 * k] = gr;
    d_res[2 * k + 1] = gi;
    d_mask[k] = gain_[k] * (gr * cos_[k] + gi * sin_[k]);
  }
  return {std::move(d_mask), std::move(d_res)};
}

namespace {

double decompress_power(double c) {
  if (!(c > 0.0 && c <= 1.0))
    throw std::invalid_argument("compression exponent must be in (0, 1]");
  return 1.0 / c - 1.0;
}

}  // namespace

template <typename Scalar>
std::vector<Waveform> synthesize(const Tensor<Scalar>& ri, const StftConfig& cfg,
                                 Index length, int sample_rate, double c) {
  require_rank(ri, 4, "synthesize");
  const Index b = ri.dim(0), t = ri.dim(1), f = ri.dim(2);
  require_shape(ri, {b, t, f, 2}, "synthesize");
  if (f != cfg.bins()) throw ShapeError("synthesize: bin count does not match the STFT");
  const double p = decompress_power(c);
  std::vector<Waveform> out;
  out.reserve(b);
  for (Index n = 0; n < b; ++n) {
    Spectrogram s;
    s.config = cfg;
    s.sample_rate = sample_rate;
    s.real.resize(t, f);
    s.imag.resize(t, f);
    for (Index i = 0; i < t; ++i)
      for (Index k = 0; k < f; ++k) {
        const Index o = ((n * t + i) * f + k) * 2;
        const double r = ri[o], im = ri[o + 1];
        const double g = std::pow(r * r + im * im + kMagnitudeEps, 0.5 * p);
        s.real(i, k) = g * r;
        s.imag(i, k) = g * im;
      }
    out.push_back(istft(s, cfg, length));
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> synthesize_backward(const Tensor<Scalar>& ri,
                                   const std::vector<Eigen::VectorXd>& grad,
                                   const StftConfig& cfg, double c) {
  require_rank(ri, 4, "synthesize_backward");
  const Index b = ri.dim(0), t = ri.dim(1), f = ri.dim(2);
  if (Index(grad.size()) != b)
    throw ShapeError("synthesize_backward: one gradient per batch item expected");
  const double p = decompress_power(c);
  Tensor<Scalar> d(ri.shape());
  Eigen::ArrayXXd gr, gi;
  for (Index n = 0; n < b; ++n) {
    istft_adjoint(grad[n], cfg, t, gr, gi);
    for (Index i = 0; i < t; ++i)
      for (Index k = 0; k < f; ++k) {
        const Index o = ((n * t + i) * f + k) * 2;
        const double r = ri[o], im = ri[o + 1];
        const double m2 = r * r + im * im + kMagnitudeEps;
        const double g = std::pow(m2, 0.5 * p);
        const double q = p * g / m2 * (gr(i, k) * r + gi(i, k) * im);
        d[o] = Scalar(g * gr(i, k) + q * r);
        d[o + 1] = Scalar(g * gi(i, k) + q * im);
      }
  }
  return d;
}

template class Recombiner<float>;
template class Recombiner<double>;
template std::vector<Waveform> synthesize(const Tensor<float>&, const StftConfig&,
                                          Index, int, double);
template std::vector<Waveform> synthesize(const Tensor<double>&, const StftConfig&,
                                          Index, int, double);
template Tensor<float> synthesize_backward(const Tensor<float>&,
                                           const std::vector<Eigen::VectorXd>&,
                                           const StftConfig&, double);
template Tensor<double> synthesize_backward(const Tensor<double>&,
                                            const std::vector<Eigen::VectorXd>&,
                                            const StftConfig&, double);

}  // namespace cmgan
