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

// Training objectives. Every loss returns its value together with the
// gradient with respect to the estimate, so callers can chain backward
// passes by hand. Squared norms are realized as mean squared errors.

#ifndef CMGAN_LOSSES_HPP_
#define CMGAN_LOSSES_HPP_

#include <Eigen/Core>

#include <string>
#include <vector>

#include "cmgan/nn/tensor.hpp"

namespace cmgan {

struct LossWeights {
  double alpha = 0.7;
  double gamma_tf = 1.0;
  double gamma_gan = 0.01;
  double gamma_time = 1.0;

  void validate() const;
};

enum class QualityKind { kPesq, kLlr };

std::string to_string(QualityKind kind);
QualityKind parse_quality_kind(const std::string& name);

struct QualityScore {
  double value = 0.0;
  QualityKind kind = QualityKind::kLlr;
};

// PESQ: (raw + 0.5) / 5; LLR: clamp(raw, 0, 2) / 2. Both clamped to [0, 1].
QualityScore normalize_quality(double raw, QualityKind kind);

// Discriminator target for the clean pair: 1 for PESQ, 0 for LLR (a lower
// LLR is better).
double clean_target(QualityKind kind);

template <typename Scalar>
struct TfLoss {
  Scalar value = 0;
  Scalar magnitude = 0;
  Scalar complex = 0;
  Tensor<Scalar> grad_ri;   // d/d estimate (real, imag), B x T x F x 2
  Tensor<Scalar> grad_mag;  // d/d estimate magnitude, B x T x F
};

// alpha * MSE(|X|, |X^|) + (1 - alpha) * (MSE(X_r, X^_r) + MSE(X_i, X^_i)).
template <typename Scalar>
TfLoss<Scalar> tf_loss(const Tensor<Scalar>& clean_ri,
                       const Tensor<Scalar>& clean_mag,
                       const Tensor<Scalar>& est_ri,
                       const Tensor<Scalar>& est_mag, double alpha);

struct TimeLoss {
  double value = 0.0;
  // One gradient per waveform, d/d estimate.
  std::vector<Eigen::VectorXd> grad;
};

// Mean absolute error over every sample of the batch.
TimeLoss time_loss(const std::vector<Eigen::VectorXd>& clean,
                   const std::vector<Eigen::VectorXd>& estimate);

template <typename Scalar>
struct ScoreLoss {
  Scalar value = 0;
  Tensor<Scalar> grad;  // d/d scores, B x 1
};

// mean((D(X, X^) - target)^2).
template <typename Scalar>
ScoreLoss<Scalar> gen_adv_loss(const Tensor<Scalar>& scores, double target);

template <typename Scalar>
struct DiscLoss {
  Scalar value = 0;
  Tensor<Scalar> grad_clean;     // d/d D(X, X)
  Tensor<Scalar> grad_enhanced;  // d/d D(X, X^)
};

// mean((D(X, X) - t_clean)^2) + mean((D(X, X^) - q_b)^2).
template <typename Scalar>
DiscLoss<Scalar> disc_loss(const Tensor<Scalar>& clean_scores,
                           const Tensor<Scalar>& enhanced_scores,
                           const std::vector<double>& quality, double t_clean);

struct GenLossParts {
  double tf = 0.0;
  double gan = 0.0;
  double time = 0.0;
};

double total_gen_loss(const GenLossParts& parts, const LossWeights& w);

}  // namespace cmgan

#endif  // CMGAN_LOSSES_HPP_
