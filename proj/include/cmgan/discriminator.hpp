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

#ifndef CMGAN_DISCRIMINATOR_HPP_
#define CMGAN_DISCRIMINATOR_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cmgan/generator.hpp"
#include "cmgan/nn/blocks.hpp"

namespace cmgan {

struct DiscriminatorConfig {
  std::vector<Index> channels{16, 32, 64, 128};
  Index hidden = 64;
  Index freq_bins = 201;

  void validate() const;
  // Each stride-2 block needs at least one output frame.
  Index min_frames() const { return Index{1} << channels.size(); }
  bool operator==(const DiscriminatorConfig&) const = default;
};

// Metric discriminator: (reference, test) magnitudes stacked as two channels,
// four 4x4 stride-2 conv blocks, global average pooling, Linear -> PReLU ->
// Linear -> sigmoid. Scores are B x 1 in (0, 1).
template <typename Scalar>
class Discriminator {
 public:
  explicit Discriminator(const DiscriminatorConfig& cfg = {}, std::uint64_t seed = 0);

  const DiscriminatorConfig& config() const { return cfg_; }

  // ref, test: B x T x F compressed magnitudes.
  Tensor<Scalar> forward(const Tensor<Scalar>& ref, const Tensor<Scalar>& test);
  // Accumulates parameter gradients; returns (d ref, d test).
  std::pair<Tensor<Scalar>, Tensor<Scalar>> backward(const Tensor<Scalar>& d_score);

  std::vector<ShapeRow> shape_walk(Index batch, Index frames) const;

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      blocks_[i].visit(prefix + "block" + std::to_string(i) + ".", fn);
    hidden_.visit(prefix + "linear1.", fn);
    act_.visit(prefix + "prelu.", fn);
    out_.visit(prefix + "linear2.", fn);
  }
  void set_mode(const RunMode&) {}

 private:
  DiscriminatorConfig cfg_;
  std::vector<ConvBlock<Scalar>> blocks_;
  Linear<Scalar> hidden_;
  PRelu<Scalar> act_;
  Linear<Scalar> out_;
  Sigmoid<Scalar> sigmoid_;
  Shape pooled_from_;
};

}  // namespace cmgan

#endif  // CMGAN_DISCRIMINATOR_HPP_
