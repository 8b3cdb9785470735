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

#include "cmgan/discriminator.hpp"

#include <stdexcept>

namespace cmgan {

void DiscriminatorConfig::validate() const {
  if (channels.size() != 4) throw std::invalid_argument("discriminator needs four conv blocks");
  for (Index c : channels)
    if (c <= 0) throw std::invalid_argument("discriminator channels must be positive");
  if (hidden <= 0 || freq_bins < min_frames())
    throw std::invalid_argument("invalid discriminator sizes");
}

namespace {

Conv2dSpec block_spec(Index in, Index out) {
  Conv2dSpec s;
  s.in_channels = in;
  s.out_channels = out;
  s.kernel_t = s.kernel_f = 4;
  s.stride_t = s.stride_f = 2;
  s.pad_t_lo = s.pad_t_hi = s.pad_f_lo = s.pad_f_hi = 1;
  s.bias = false;
  return s;
}

}  // namespace

template <typename Scalar>
Discriminator<Scalar>::Discriminator(const DiscriminatorConfig& cfg,
                                     std::uint64_t seed)
    : cfg_(cfg) {
  cfg_.validate();
  Initializer init(seed);
  Index in = 2;
  for (Index c : cfg_.channels) {
    blocks_.emplace_back(block_spec(in, c), init);
    in = c;
  }
  hidden_ = Linear<Scalar>(in, cfg_.hidden, init);
  act_ = PRelu<Scalar>(cfg_.hidden, PReluAxis::kChannel);
  out_ = Linear<Scalar>(cfg_.hidden, 1, init);
}

template <typename Scalar>
Tensor<Scalar> Discriminator<Scalar>::forward(const Tensor<Scalar>& ref,
                                              const Tensor<Scalar>& test) {
  require_rank(ref, 3, "Discriminator reference");
  require_shape(test, ref.shape(), "Discriminator test");
  const Index b = ref.dim(0), t = ref.dim(1), f = ref.dim(2);
  if (f != cfg_.freq_bins)
    throw ShapeError("Discriminator: expected " + std::to_string(cfg_.freq_bins) +
                     " frequency bins, got " + std::to_string(f));
  if (t < cfg_.min_frames())
    throw ShapeError("Discriminator: needs at least " +
                     std::to_string(cfg_.min_frames()) + " frames, got " +
                     std::to_string(t));
  Tensor<Scalar> x({b, t, f, 2});
  for (Index k = 0; k < b * t * f; ++k) {
    x[2 * k] = ref[k];
    x[2 * k + 1] = test[k];
  }
  for (auto& blk : blocks_) x = blk.forward(x);
  pooled_from_ = x.shape();
  const Index c = x.dim(3), cells = x.dim(1) * x.dim(2);
  Tensor<Scalar> pooled({b, c});
  for (Index n = 0; n < b; ++n)
    pooled.matrix().row(n) =
        x.matrix().middleRows(n * cells, cells).colwise().sum() / Scalar(cells);
  return sigmoid_.forward(out_.forward(act_.forward(hidden_.forward(pooled))));
}

template <typename Scalar>
std::pair<Tensor<Scalar>, Tensor<Scalar>> Discriminator<Scalar>::backward(
    const Tensor<Scalar>& d_score) {
  const Tensor<Scalar> d_pooled =
      hidden_.backward(act_.backward(out_.backward(sigmoid_.backward(d_score))));
  Tensor<Scalar> g(pooled_from_);
  const Index b = g.dim(0), cells = g.dim(1) * g.dim(2);
  for (Index n = 0; n < b; ++n)
    g.matrix().middleRows(n * cells, cells).rowwise() =
        d_pooled.matrix().row(n) / Scalar(cells);
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = it->backward(g);
  const Index t = g.dim(1), f = g.dim(2);
  Tensor<Scalar> d_ref({b, t, f}), d_test({b, t, f});
  for (Index k = 0; k < b * t * f; ++k) {
    d_ref[k] = g[2 * k];
    d_test[k] = g[2 * k + 1];
  }
  return {std::move(d_ref), std::move(d_test)};
}

template <typename Scalar>
std::vector<ShapeRow> Discriminator<Scalar>::shape_walk(Index batch,
                                                        Index frames) const {
  std::vector<ShapeRow> rows;
  Shape s{batch, frames, cfg_.freq_bins, 2};
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Shape o = blocks_[i].output_shape(s);
    rows.push_back({"Metric Disc.", "2D-Conv.-" + std::to_string(i + 1), s, o});
    s = o;
  }
  const Shape pooled{batch, s.back()};
  rows.push_back({"Metric Disc.", "Avg. Pooling", s, pooled});
  const Shape h{batch, cfg_.hidden};
  rows.push_back({"Metric Disc.", "Linear-1", pooled, h});
  rows.push_back({"Metric Disc.", "PReLU", h, h});
  rows.push_back({"Metric Disc.", "Linear-2", h, {batch, 1}});
  rows.push_back({"Metric Disc.", "Sigmoid", {batch, 1}, {batch, 1}});
  return rows;
}

template class Discriminator<float>;
template class Discriminator<double>;

}  // namespace cmgan
