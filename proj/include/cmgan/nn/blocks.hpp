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

#ifndef CMGAN_NN_BLOCKS_HPP_
#define CMGAN_NN_BLOCKS_HPP_

#include <string>
#include <vector>

#include "cmgan/nn/layers.hpp"

namespace cmgan {

// Convolution -> instance norm -> per-channel PReLU.
template <typename Scalar>
class ConvBlock {
 public:
  ConvBlock() = default;
  ConvBlock(const Conv2dSpec& spec, Initializer& init)
      : conv_(spec, init),
        norm_(spec.out_channels),
        act_(spec.out_channels, PReluAxis::kChannel) {}

  Shape output_shape(const Shape& in) const { return conv_.output_shape(in); }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    return act_.forward(norm_.forward(conv_.forward(x)));
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    return conv_.backward(norm_.backward(act_.backward(dy)));
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    conv_.visit(prefix + "conv.", fn);
    norm_.visit(prefix + "norm.", fn);
    act_.visit(prefix + "prelu.", fn);
  }
  void set_mode(const RunMode&) {}

  Conv2d<Scalar>& conv() { return conv_; }
  const Conv2d<Scalar>& conv() const { return conv_; }
  InstanceNorm<Scalar>& norm() { return norm_; }
  PRelu<Scalar>& prelu() { return act_; }

 private:
  Conv2d<Scalar> conv_;
  InstanceNorm<Scalar> norm_;
  PRelu<Scalar> act_;
};

// Dilated DenseNet: stage k sees the channel concatenation of every earlier
// stage output and the block input; kernel 2x3 with dilation 2^k along time.
template <typename Scalar>
class DilatedDenseBlock {
 public:
  static constexpr Index kDefaultDepth = 4;

  DilatedDenseBlock() = default;
  DilatedDenseBlock(Index channels, Initializer& init,
                    Index depth = kDefaultDepth)
      : channels_(channels) {
    for (Index i = 0; i < depth; ++i) stages_.emplace_back(stage_spec(channels, i), init);
  }

  static Conv2dSpec stage_spec(Index channels, Index stage) {
    const Index dilation = Index{1} << stage;
    Conv2dSpec s;
    s.in_channels = channels * (stage + 1);
    s.out_channels = channels;
    s.kernel_t = 2;
    s.kernel_f = 3;
    s.dilation_t = dilation;
    s.pad_t_lo = dilation / 2;
    s.pad_t_hi = dilation - dilation / 2;
    s.pad_f_lo = 1;
    s.pad_f_hi = 1;
    return s;
  }

  Index depth() const { return static_cast<Index>(stages_.size()); }
  Index channels() const { return channels_; }
  const std::vector<ConvBlock<Scalar>>& stages() const { return stages_; }
  std::vector<ConvBlock<Scalar>>& stages() { return stages_; }

  Shape output_shape(const Shape& in) const {
    if (in.size() != 4 || in[3] != channels_)
      throw ShapeError("DilatedDenseBlock: expected " +
                       std::to_string(channels_) + " channels, got " +
                       to_string(in));
    Shape s = in;
    for (Index i = 0; i < depth(); ++i) {
      s.back() = channels_ * (i + 1);
      s = stages_[i].output_shape(s);
    }
    return s;
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    output_shape(x.shape());
    Tensor<Scalar> skip = x;
    Tensor<Scalar> out;
    for (Index i = 0; i < depth(); ++i) {
      out = stages_[i].forward(skip);
      if (i + 1 < depth()) skip = concat_channels<Scalar>({&out, &skip});
    }
    return out;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> g_out = dy, g_skip;
    for (Index i = depth() - 1; i >= 0; --i) {
      Tensor<Scalar> g = stages_[i].backward(g_out);
      if (!g_skip.empty()) g.flat() += g_skip.flat();
      if (i == 0) return g;
      auto parts = split_channels(g, {channels_, channels_ * i});
      g_out = std::move(parts[0]);
      g_skip = std::move(parts[1]);
    }
    return dy;  // depth 0
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    for (Index i = 0; i < depth(); ++i)
      stages_[i].visit(prefix + "stage" + std::to_string(i) + ".", fn);
  }
  void set_mode(const RunMode&) {}

 private:
  Index channels_ = 0;
  std::vector<ConvBlock<Scalar>> stages_;
};

// y[b, t, f*r + j, c] = x[b, t, f, j*C + c]: channel block j becomes the j-th
// interleaved frequency phase.
template <typename Scalar>
Tensor<Scalar> shuffle_frequency(const Tensor<Scalar>& x, Index r) {
  require_rank(x, 4, "shuffle_frequency");
  if (x.dim(3) % r) throw ShapeError("shuffle_frequency: channels % r != 0");
  const Index rows = x.dim(0) * x.dim(1), f = x.dim(2), c = x.dim(3) / r;
  Tensor<Scalar> y({x.dim(0), x.dim(1), f * r, c});
  for (Index n = 0; n < rows; ++n)
    for (Index k = 0; k < f; ++k)
      for (Index j = 0; j < r; ++j) {
        const Scalar* src = x.data() + (n * f + k) * r * c + j * c;
        std::copy(src, src + c, y.data() + ((n * f + k) * r + j) * c);
      }
  return y;
}

template <typename Scalar>
Tensor<Scalar> unshuffle_frequency(const Tensor<Scalar>& y, Index r) {
  require_rank(y, 4, "unshuffle_frequency");
  if (y.dim(2) % r) throw ShapeError("unshuffle_frequency: F % r != 0");
  const Index rows = y.dim(0) * y.dim(1), f = y.dim(2) / r, c = y.dim(3);
  Tensor<Scalar> x({y.dim(0), y.dim(1), f, c * r});
  for (Index n = 0; n < rows; ++n)
    for (Index k = 0; k < f; ++k)
      for (Index j = 0; j < r; ++j) {
        const Scalar* src = y.data() + ((n * f + k) * r + j) * c;
        std::copy(src, src + c, x.data() + (n * f + k) * r * c + j * c);
      }
  return x;
}

// Sub-pixel convolution along frequency: 1x3 conv to C_out * r channels,
// then shuffle_frequency, so B x T x F x C_in -> B x T x rF x C_out.
template <typename Scalar>
class SubPixelConv {
 public:
  SubPixelConv() = default;
  SubPixelConv(Index in_channels, Index out_channels, Index ratio,
               Initializer& init)
      : ratio_(ratio), conv_(conv_spec(in_channels, out_channels, ratio), init) {}

  static Conv2dSpec conv_spec(Index in_channels, Index out_channels,
                              Index ratio) {
    Conv2dSpec s;
    s.in_channels = in_channels;
    s.out_channels = out_channels * ratio;
    s.kernel_f = 3;
    s.pad_f_lo = 1;
    s.pad_f_hi = 1;
    return s;
  }

  Index ratio() const { return ratio_; }
  // Channel count produced by the convolution before the shuffle.
  Index pre_shuffle_channels() const { return conv_.spec().out_channels; }

  Shape output_shape(const Shape& in) const {
    Shape s = conv_.output_shape(in);
    s[2] *= ratio_;
    s[3] /= ratio_;
    return s;
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    return shuffle_frequency(conv_.forward(x), ratio_);
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    return conv_.backward(unshuffle_frequency(dy, ratio_));
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    conv_.visit(prefix + "conv.", fn);
  }
  void set_mode(const RunMode&) {}

  Conv2d<Scalar>& conv() { return conv_; }

 private:
  Index ratio_ = 2;
  Conv2d<Scalar> conv_;
};

}  // namespace cmgan

#endif  // CMGAN_NN_BLOCKS_HPP_
