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

#include "cmgan/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmgan {

void LossWeights::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("loss weights: alpha outside [0, 1]");
  if (gamma_tf < 0 || gamma_gan < 0 || gamma_time < 0)
    throw std::invalid_argument("loss weights: negative gamma");
}

std::string to_string(QualityKind kind) {
  return kind == QualityKind::kPesq ? "pesq" : "llr";
}

QualityKind parse_quality_kind(const std::string& name) {
  if (name == "pesq") return QualityKind::kPesq;
  if (name == "llr") return QualityKind::kLlr;
  throw std::invalid_argument("unknown quality kind '" + name + "'");
}

QualityScore normalize_quality(double raw, QualityKind kind) {
  if (!std::isfinite(raw)) throw std::invalid_argument("normalize_quality: non-finite score");
  const double q = kind == QualityKind::kPesq ? (raw + 0.5) / 5.0
                                              : std::clamp(raw, 0.0, 2.0) / 2.0;
  return {std::clamp(q, 0.0, 1.0), kind};
}

double clean_target(QualityKind kind) { return kind == QualityKind::kPesq ? 1.0 : 0.0; }

template <typename Scalar>
TfLoss<Scalar> tf_loss(const Tensor<Scalar>& clean_ri,
                       const Tensor<Scalar>& clean_mag,
                       const Tensor<Scalar>& est_ri,
                       const Tensor<Scalar>& est_mag, double alpha) {
  require_shape(est_ri, clean_ri.shape(), "tf_loss (real/imag)");
  require_shape(est_mag, clean_mag.shape(), "tf_loss (magnitude)");
  if (clean_ri.size() != 2 * clean_mag.size())
    throw ShapeError("tf_loss: magnitude and real/imag grids disagree");
  const Index n = clean_mag.size();
  if (n == 0) throw ShapeError("tf_loss: empty input");
  TfLoss<Scalar> out;
  out.grad_mag = Tensor<Scalar>(est_mag.shape());
  out.grad_ri = Tensor<Scalar>(est_ri.shape());

  const auto dm = (est_mag.flat() - clean_mag.flat()).eval();
  const auto dc = (est_ri.flat() - clean_ri.flat()).eval();
  // Real and imaginary MSEs each average over n entries.
  out.magnitude = dm.squaredNorm() / Scalar(n);
  out.complex = dc.squaredNorm() / Scalar(n);
  const auto a = static_cast<Scalar>(alpha);
  out.value = a * out.magnitude + (Scalar(1) - a) * out.complex;
  out.grad_mag.flat() = dm * (Scalar(2) * a / Scalar(n));
  out.grad_ri.flat() = dc * (Scalar(2) * (Scalar(1) - a) / Scalar(n));
  return out;
}

TimeLoss time_loss(const std::vector<Eigen::VectorXd>& clean,
                   const std::vector<Eigen::VectorXd>& estimate) {
  if (clean.size() != estimate.size() || clean.empty())
    throw std::invalid_argument("time_loss: batch size mismatch");
  Index total = 0;
  for (std::size_t b = 0; b < clean.size(); ++b) {
    if (clean[b].size() != estimate[b].size())
      throw std::invalid_argument("time_loss: length mismatch in item " + std::to_string(b));
    total += clean[b].size();
  }
  if (total == 0) throw std::invalid_argument("time_loss: empty waveforms");
  TimeLoss out;
  for (std::size_t b = 0; b < clean.size(); ++b) {
    const Eigen::ArrayXd d = (estimate[b] - clean[b]).array();
    out.value += d.abs().sum();
    out.grad.push_back((d.sign() / double(total)).matrix());
  }
  out.value /= double(total);
  return out;
}

template <typename Scalar>
ScoreLoss<Scalar> gen_adv_loss(const Tensor<Scalar>& scores, double target) {
  if (scores.size() == 0) throw ShapeError("gen_adv_loss: no scores");
  ScoreLoss<Scalar> out;
  const auto d = (scores.flat().array() - Scalar(target)).eval();
  out.value = d.square().mean();
  out.grad = Tensor<Scalar>(scores.shape());
  out.grad.flat() = (d * (Scalar(2) / Scalar(scores.size()))).matrix();
  return out;
}

template <typename Scalar>
DiscLoss<Scalar> disc_loss(const Tensor<Scalar>& clean_scores,
                           const Tensor<Scalar>& enhanced_scores,
                           const std::vector<double>& quality, double t_clean) {
  const Index b = enhanced_scores.size();
  if (b == 0 || clean_scores.size() != b || Index(quality.size()) != b)
    throw ShapeError("disc_loss: scores and quality targets disagree in batch size");
  DiscLoss<Scalar> out;
  out.grad_clean = Tensor<Scalar>(clean_scores.shape());
  out.grad_enhanced = Tensor<Scalar>(enhanced_scores.shape());
  Scalar clean_sum = 0, enh_sum = 0;
  for (Index i = 0; i < b; ++i) {
    const Scalar dc = clean_scores[i] - Scalar(t_clean);
    const Scalar de = enhanced_scores[i] - Scalar(quality[static_cast<std::size_t>(i)]);
    clean_sum += dc * dc;
    enh_sum += de * de;
    out.grad_clean[i] = Scalar(2) * dc / Scalar(b);
    out.grad_enhanced[i] = Scalar(2) * de / Scalar(b);
  }
  out.value = (clean_sum + enh_sum) / Scalar(b);
  return out;
}

double total_gen_loss(const GenLossParts& p, const LossWeights& w) {
  return w.gamma_tf * p.tf + w.gamma_gan * p.gan + w.gamma_time * p.time;
}

#define CMGAN_INSTANTIATE(S)                                                      \
  template TfLoss<S> tf_loss<S>(const Tensor<S>&, const Tensor<S>&,               \
                                const Tensor<S>&, const Tensor<S>&, double);      \
  template ScoreLoss<S> gen_adv_loss<S>(const Tensor<S>&, double);                \
  template DiscLoss<S> disc_loss<S>(const Tensor<S>&, const Tensor<S>&,           \
                                    const std::vector<double>&, double);
CMGAN_INSTANTIATE(float)
CMGAN_INSTANTIATE(double)
#undef CMGAN_INSTANTIATE

}  // namespace cmgan
