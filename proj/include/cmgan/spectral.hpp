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

// Differentiable glue between network outputs and spectrograms: mask/offset
// recombination with the noisy input, and synthesis of waveforms from a
// compressed complex estimate.

#ifndef CMGAN_SPECTRAL_HPP_
#define CMGAN_SPECTRAL_HPP_

#include <string>
#include <utility>
#include <vector>

#include "cmgan/dsp.hpp"
#include "cmgan/nn/tensor.hpp"

namespace cmgan {

enum class MaskMode { kMultiply, kAdd };

std::string to_string(MaskMode mode);
MaskMode parse_mask_mode(const std::string& name);
MaskMode mask_mode_for(Task task);

// Added under the square root so the magnitude stays differentiable at 0.
inline constexpr double kMagnitudeEps = 1e-14;

template <typename Scalar>
struct Recombined {
  Tensor<Scalar> ri;   // B x T x F x 2
  Tensor<Scalar> mag;  // B x T x F
};

// multiply: X_r = m Y_m cos(Y_p) + R_r,   X_i = m Y_m sin(Y_p) + R_i
// add:      X_r = (M + Y_m) cos(Y_p) + R_r, X_i = (M + Y_m) sin(Y_p) + R_i
// X_m = sqrt(X_r^2 + X_i^2). Y is the packed (magnitude, real, imag) input.
template <typename Scalar>
class Recombiner {
 public:
  explicit Recombiner(MaskMode mode = MaskMode::kMultiply) : mode_(mode) {}

  MaskMode mode() const { return mode_; }

  Recombined<Scalar> forward(const Tensor<Scalar>& mask,
                             const Tensor<Scalar>& residual,
                             const Tensor<Scalar>& packed);

  // Returns (d mask, d residual); the packed input is treated as constant.
  std::pair<Tensor<Scalar>, Tensor<Scalar>> backward(
      const Tensor<Scalar>& grad_ri, const Tensor<Scalar>& grad_mag) const;

 private:
  MaskMode mode_;
  Tensor<Scalar> gain_;    // d base / d mask: Y_m (multiply) or 1 (add)
  Tensor<Scalar> cos_;
  Tensor<Scalar> sin_;
  Tensor<Scalar> ri_;
  Tensor<Scalar> mag_;
};

// Decompresses each batch item (|X|^(1/c) with the phase kept) and inverts
// the STFT to `length` samples.
template <typename Scalar>
std::vector<Waveform> synthesize(const Tensor<Scalar>& ri, const StftConfig& cfg,
                                 Index length, int sample_rate = 16000,
                                 double c = kCompressExponent);

// Adjoint of synthesize: maps per-item waveform gradients to d ri.
template <typename Scalar>
Tensor<Scalar> synthesize_backward(const Tensor<Scalar>& ri,
                                   const std::vector<Eigen::VectorXd>& grad,
                                   const StftConfig& cfg,
                                   double c = kCompressExponent);

}  // namespace cmgan

#endif  // CMGAN_SPECTRAL_HPP_
