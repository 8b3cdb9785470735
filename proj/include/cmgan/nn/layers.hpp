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

// Elementary differentiable layers. All activations are channel-last.

#ifndef CMGAN_NN_LAYERS_HPP_
#define CMGAN_NN_LAYERS_HPP_

#include <algorithm>
#include <cmath>
#include <string>

#include "cmgan/nn/module.hpp"
#include "cmgan/nn/tensor.hpp"

namespace cmgan {

// ---------------------------------------------------------------- Linear

template <typename Scalar>
class Linear {
 public:
  Linear() = default;
  Linear(Index in_features, Index out_features, Initializer& init,
         bool bias = true)
      : weight_({out_features, in_features}),
        bias_({bias ? out_features : 0}),
        has_bias_(bias) {
    init.fill_uniform(weight_.value,
                      std::sqrt(6.0 / double(in_features + out_features)));
  }

  Index in_features() const { return weight_.value.dim(1); }
  Index out_features() const { return weight_.value.dim(0); }

  Shape output_shape(Shape in) const {
    in.back() = out_features();
    return in;
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    if (x.dim(-1) != in_features())
      throw ShapeError("Linear: expected " + std::to_string(in_features()) +
                       " input features, got shape " + to_string(x.shape()));
    input_ = x;
    Tensor<Scalar> y(output_shape(x.shape()));
    y.matrix().noalias() = x.matrix() * weight_.value.matrix().transpose();
    if (has_bias_) y.matrix().rowwise() += bias_.value.flat().transpose();
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    weight_.grad.matrix().noalias() += dy.matrix().transpose() * input_.matrix();
    if (has_bias_) bias_.grad.flat() += dy.matrix().colwise().sum().transpose();
    Tensor<Scalar> dx(input_.shape());
    dx.matrix().noalias() = dy.matrix() * weight_.value.matrix();
    return dx;
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    fn(prefix + "weight", weight_);
    if (has_bias_) fn(prefix + "bias", bias_);
  }
  void set_mode(const RunMode&) {}

  Param<Scalar>& weight() { return weight_; }
  Param<Scalar>& bias() { return bias_; }

 private:
  Param<Scalar> weight_;
  Param<Scalar> bias_;
  bool has_bias_ = true;
  Tensor<Scalar> input_;
};

// ---------------------------------------------------------------- Conv2d

struct Conv2dSpec {
  Index in_channels = 1;
  Index out_channels = 1;
  Index kernel_t = 1, kernel_f = 1;
  Index stride_t = 1, stride_f = 1;
  Index dilation_t = 1, dilation_f = 1;
  Index pad_t_lo = 0, pad_t_hi = 0;
  Index pad_f_lo = 0, pad_f_hi = 0;
  bool bias = true;

  Index kernel_volume() const { return kernel_t * kernel_f * in_channels; }

  // Floor-division output extent; zero or negative means the input is too
  // short for the kernel.
  Index out_t(Index t) const {
    return floor_div(t + pad_t_lo + pad_t_hi - dilation_t * (kernel_t - 1) - 1,
                     stride_t) + 1;
  }
  Index out_f(Index f) const {
    return floor_div(f + pad_f_lo + pad_f_hi - dilation_f * (kernel_f - 1) - 1,
                     stride_f) + 1;
  }

  static Index floor_div(Index a, Index b) {
    return a >= 0 ? a / b : -((-a + b - 1) / b);
  }
};

// 2-D convolution over (T, F) of a B x T x F x Cin tensor, via im2col + GEMM.
template <typename Scalar>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const Conv2dSpec& spec, Initializer& init)
      : spec_(spec),
        weight_({spec.out_channels, spec.kernel_t, spec.kernel_f,
                 spec.in_channels}),
        bias_({spec.bias ? spec.out_channels : 0}) {
    const double bound = 1.0 / std::sqrt(double(spec.kernel_volume()));
    init.fill_uniform(weight_.value, bound);
    if (spec.bias) init.fill_uniform(bias_.value, bound);
  }

  const Conv2dSpec& spec() const { return spec_; }

  Shape output_shape(const Shape& in) const {
    if (in.size() != 4 || in[3] != spec_.in_channels)
      throw ShapeError("Conv2d: expected B x T x F x " +
                       std::to_string(spec_.in_channels) + ", got " +
                       to_string(in));
    const Index to = spec_.out_t(in[1]), fo = spec_.out_f(in[2]);
    if (to <= 0 || fo <= 0)
      throw ShapeError("Conv2d: input " + to_string(in) +
                       " too small for kernel");
    return {in[0], to, fo, spec_.out_channels};
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    Tensor<Scalar> y(output_shape(x.shape()));
    input_ = x;
    const Index cout = spec_.out_channels;
    ConstMatrixMap<Scalar> w(weight_.value.data(), cout, spec_.kernel_volume());
    if (pointwise()) {
      y.matrix().noalias() = x.matrix() * w.transpose();
    } else {
      const Index batch = x.dim(0), to = y.dim(1), fo = y.dim(2);
      const Index chunk = chunk_rows(fo);
      RowMatrix<Scalar> col;
      for (Index b = 0; b < batch; ++b)
        for (Index t0 = 0; t0 < to; t0 += chunk) {
          const Index nt = std::min(chunk, to - t0);
          im2col(x, b, t0, nt, fo, col);
          MatrixMap<Scalar> yb(y.data() + (b * to + t0) * fo * cout, nt * fo,
                               cout);
          yb.noalias() = col * w.transpose();
        }
    }
    if (spec_.bias) y.matrix().rowwise() += bias_.value.flat().transpose();
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const Index cout = spec_.out_channels, kvol = spec_.kernel_volume();
    ConstMatrixMap<Scalar> w(weight_.value.data(), cout, kvol);
    MatrixMap<Scalar> dw(weight_.grad.data(), cout, kvol);
    if (spec_.bias) bias_.grad.flat() += dy.matrix().colwise().sum().transpose();
    Tensor<Scalar> dx(input_.shape());
    if (pointwise()) {
      dw.noalias() += dy.matrix().transpose() * input_.matrix();
      dx.matrix().noalias() = dy.matrix() * w;
      return dx;
    }
    const Index batch = dy.dim(0), to = dy.dim(1), fo = dy.dim(2);
    const Index chunk = chunk_rows(fo);
    RowMatrix<Scalar> col, dcol;
    for (Index b = 0; b < batch; ++b)
      for (Index t0 = 0; t0 < to; t0 += chunk) {
        const Index nt = std::min(chunk, to - t0);
        ConstMatrixMap<Scalar> dyb(dy.data() + (b * to + t0) * fo * cout,
                                   nt * fo, cout);
        im2col(input_, b, t0, nt, fo, col);
        dw.noalias() += dyb.transpose() * col;
        dcol.noalias() = dyb * w;
        col2im(dcol, b, t0, nt, fo, dx);
      }
    return dx;
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    fn(prefix + "weight", weight_);
    if (spec_.bias) fn(prefix + "bias", bias_);
  }
  void set_mode(const RunMode&) {}

  Param<Scalar>& weight() { return weight_; }
  Param<Scalar>& bias() { return bias_; }

 private:
  bool pointwise() const {
    const Conv2dSpec& s = spec_;
    return s.kernel_t == 1 && s.kernel_f == 1 && s.stride_t == 1 &&
           s.stride_f == 1 && s.pad_t_lo == 0 && s.pad_t_hi == 0 &&
           s.pad_f_lo == 0 && s.pad_f_hi == 0;
  }

  Index chunk_rows(Index fo) const {
    constexpr Index kBudget = Index{1} << 20;
    return std::max<Index>(1, kBudget / std::max<Index>(1, fo * spec_.kernel_volume()));
  }

  template <typename Fn>
  void for_each_tap(const Tensor<Scalar>& x, Index b, Index t0, Index nt,
                    Index fo, Fn&& fn) const {
    const Conv2dSpec& s = spec_;
    const Index t_in = x.dim(1), f_in = x.dim(2), cin = s.in_channels;
    for (Index ti = 0; ti < nt; ++ti) {
      const Index t_out = t0 + ti;
      for (Index f_out = 0; f_out < fo; ++f_out) {
        const Index row = ti * fo + f_out;
        for (Index kt = 0; kt < s.kernel_t; ++kt) {
          const Index t = t_out * s.stride_t - s.pad_t_lo + kt * s.dilation_t;
          for (Index kf = 0; kf < s.kernel_f; ++kf) {
            const Index f = f_out * s.stride_f - s.pad_f_lo + kf * s.dilation_f;
            const Index col_off = (kt * s.kernel_f + kf) * cin;
            const bool inside = t >= 0 && t < t_in && f >= 0 && f < f_in;
            fn(row, col_off, inside ? ((b * t_in + t) * f_in + f) * cin : -1);
          }
        }
      }
    }
  }

  void im2col(const Tensor<Scalar>& x, Index b, Index t0, Index nt, Index fo,
              RowMatrix<Scalar>& col) const {
    const Index kvol = spec_.kernel_volume(), cin = spec_.in_channels;
    col.resize(nt * fo, kvol);
    Scalar* dst = col.data();
    const Scalar* src = x.data();
    for_each_tap(x, b, t0, nt, fo, [&](Index row, Index off, Index in_off) {
      Scalar* d = dst + row * kvol + off;
      if (in_off < 0)
        std::fill(d, d + cin, Scalar(0));
      else
        std::copy(src + in_off, src + in_off + cin, d);
    });
  }

  void col2im(const RowMatrix<Scalar>& dcol, Index b, Index t0, Index nt,
              Index fo, Tensor<Scalar>& dx) const {
    const Index kvol = spec_.kernel_volume(), cin = spec_.in_channels;
    const Scalar* src = dcol.data();
    Scalar* dst = dx.data();
    for_each_tap(dx, b, t0, nt, fo, [&](Index row, Index off, Index in_off) {
      if (in_off < 0) return;
      const Scalar* s = src + row * kvol + off;
      Scalar* d = dst + in_off;
      for (Index c = 0; c < cin; ++c) d[c] += s[c];
    });
  }

  Conv2dSpec spec_;
  Param<Scalar> weight_;
  Param<Scalar> bias_;
  Tensor<Scalar> input_;
};

// --------------------------------------------------------- InstanceNorm

// Normalizes every (batch item, channel) over all positions in between,
// biased variance, followed by a per-channel affine map.
template <typename Scalar>
class InstanceNorm {
 public:
  InstanceNorm() = default;
  explicit InstanceNorm(Index channels, double eps = 1e-5)
      : gamma_({channels}, Scalar(1)), beta_({channels}), eps_(eps) {}

  Index channels() const { return gamma_.value.size(); }
  Shape output_shape(const Shape& in) const { return in; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    const Index c = x.dim(-1), batch = x.dim(0);
    if (c != channels()) throw ShapeError("InstanceNorm: channel mismatch");
    const Index positions = x.size() / (batch * c);
    normalized_ = Tensor<Scalar>(x.shape());
    inv_std_ = RowMatrix<Scalar>(batch, c);
    Tensor<Scalar> y(x.shape());
    const auto gamma = gamma_.value.flat().transpose().array();
    const auto beta = beta_.value.flat().transpose().array();
    for (Index b = 0; b < batch; ++b) {
      ConstMatrixMap<Scalar> xb(x.data() + b * positions * c, positions, c);
      MatrixMap<Scalar> nb(normalized_.data() + b * positions * c, positions, c);
      MatrixMap<Scalar> yb(y.data() + b * positions * c, positions, c);
      const RowMatrix<Scalar> mean = xb.colwise().mean();
      nb = xb.rowwise() - mean.row(0);
      const RowMatrix<Scalar> var = nb.array().square().colwise().mean();
      inv_std_.row(b) = (var.array() + Scalar(eps_)).rsqrt();
      nb.array().rowwise() *= inv_std_.row(b).array();
      yb.array() = (nb.array().rowwise() * gamma).rowwise() + beta;
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const Index c = dy.dim(-1), batch = dy.dim(0);
    const Index positions = dy.size() / (batch * c);
    Tensor<Scalar> dx(dy.shape());
    const auto gamma = gamma_.value.flat().transpose().array();
    for (Index b = 0; b < batch; ++b) {
      ConstMatrixMap<Scalar> dyb(dy.data() + b * positions * c, positions, c);
      ConstMatrixMap<Scalar> nb(normalized_.data() + b * positions * c,
                                positions, c);
      MatrixMap<Scalar> dxb(dx.data() + b * positions * c, positions, c);
      gamma_.grad.flat() +=
          (dyb.array() * nb.array()).colwise().sum().matrix().transpose();
      beta_.grad.flat() += dyb.colwise().sum().transpose();
      const RowMatrix<Scalar> dn = (dyb.array().rowwise() * gamma).matrix();
      const RowMatrix<Scalar> mean_dn = dn.colwise().mean();
      const RowMatrix<Scalar> mean_dn_n =
          (dn.array() * nb.array()).colwise().mean().matrix();
      dxb.array() = ((dn.array().rowwise() - mean_dn.row(0).array()) -
                     (nb.array().rowwise() * mean_dn_n.row(0).array()))
                        .rowwise() *
                    inv_std_.row(b).array();
    }
    return dx;
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    fn(prefix + "gamma", gamma_);
    fn(prefix + "beta", beta_);
  }
  void set_mode(const RunMode&) {}

  Param<Scalar>& gamma() { return gamma_; }
  Param<Scalar>& beta() { return beta_; }

 private:
  Param<Scalar> gamma_;
  Param<Scalar> beta_;
  double eps_ = 1e-5;
  Tensor<Scalar> normalized_;
  RowMatrix<Scalar> inv_std_;
};

// ---------------------------------------------------------------- PReLU

enum class PReluAxis {
  kChannel,    // one slope per trailing-axis entry
  kFrequency,  // one slope per entry of axis 2 of a B x T x F x C tensor
};

template <typename Scalar>
class PRelu {
 public:
  PRelu() = default;
  PRelu(Index count, PReluAxis axis, double init_slope = 0.2)
      : slopes_({count}, Scalar(init_slope)), axis_(axis) {}

  Shape output_shape(const Shape& in) const { return in; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    check(x);
    input_ = x;
    Tensor<Scalar> y(x.shape());
    const Index stride = stride_of(x), count = slopes_.value.size();
    const Scalar* a = slopes_.value.data();
    for (Index i = 0; i < x.size(); ++i) {
      const Scalar v = x[i];
      y[i] = v >= Scalar(0) ? v : a[(i / stride) % count] * v;
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx(dy.shape());
    const Index stride = stride_of(dy), count = slopes_.value.size();
    const Scalar* a = slopes_.value.data();
    Scalar* da = slopes_.grad.data();
    for (Index i = 0; i < dy.size(); ++i) {
      const Scalar v = input_[i];
      if (v >= Scalar(0)) {
        dx[i] = dy[i];
      } else {
        const Index k = (i / stride) % count;
        dx[i] = a[k] * dy[i];
        da[k] += v * dy[i];
      }
    }
    return dx;
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    fn(prefix + "slope", slopes_);
  }
  void set_mode(const RunMode&) {}

  Param<Scalar>& slopes() { return slopes_; }

 private:
  Index stride_of(const Tensor<Scalar>& x) const {
    return axis_ == PReluAxis::kChannel ? 1 : x.dim(-1);
  }
  void check(const Tensor<Scalar>& x) const {
    const Index n = axis_ == PReluAxis::kChannel ? x.dim(-1) : x.dim(2);
    if (n != slopes_.value.size())
      throw ShapeError("PRelu: " + std::to_string(slopes_.value.size()) +
                       " slopes for shape " + to_string(x.shape()));
  }

  Param<Scalar> slopes_;
  PReluAxis axis_ = PReluAxis::kChannel;
  Tensor<Scalar> input_;
};

// ------------------------------------------------------------ LayerNorm

template <typename Scalar>
class LayerNorm {
 public:
  LayerNorm() = default;
  explicit LayerNorm(Index features, double eps = 1e-5)
      : gamma_({features}, Scalar(1)), beta_({features}), eps_(eps) {}

  Shape output_shape(const Shape& in) const { return in; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    if (x.dim(-1) != gamma_.value.size())
      throw ShapeError("LayerNorm: feature mismatch");
    const auto xm = x.matrix();
    normalized_ = Tensor<Scalar>(x.shape());
    auto n = normalized_.matrix();
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean = xm.rowwise().mean();
    n = xm.colwise() - mean;
    inv_std_ = (n.array().square().rowwise().mean() + Scalar(eps_)).rsqrt();
    n.array().colwise() *= inv_std_.array();
    Tensor<Scalar> y(x.shape());
    y.matrix().array() =
        (n.array().rowwise() * gamma_.value.flat().transpose().array())
            .rowwise() +
        beta_.value.flat().transpose().array();
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const auto n = normalized_.matrix();
    const auto g = dy.matrix();
    gamma_.grad.flat() += (g.array() * n.array()).colwise().sum().matrix().transpose();
    beta_.grad.flat() += g.colwise().sum().transpose();
    const RowMatrix<Scalar> dn =
        (g.array().rowwise() * gamma_.value.flat().transpose().array()).matrix();
    const auto mean_dn = dn.rowwise().mean().eval();
    const auto mean_dn_n = (dn.array() * n.array()).rowwise().mean().eval();
    Tensor<Scalar> dx(dy.shape());
    dx.matrix().array() =
        ((dn.array().colwise() - mean_dn.array()) -
         n.array().colwise() * mean_dn_n)
            .colwise() *
        inv_std_.array();
    return dx;
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    fn(prefix + "gamma", gamma_);
    fn(prefix + "beta", beta_);
  }
  void set_mode(const RunMode&) {}

  Param<Scalar>& gamma() { return gamma_; }
  Param<Scalar>& beta() { return beta_; }

 private:
  Param<Scalar> gamma_;
  Param<Scalar> beta_;
  double eps_ = 1e-5;
  Tensor<Scalar> normalized_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_std_;
};

// ---------------------------------------------------------- activations

template <typename Scalar>
class Swish {
 public:
  Shape output_shape(const Shape& in) const { return in; }
  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    input_ = x;
    Tensor<Scalar> y(x.shape());
    y.flat().array() = x.flat().array() / (Scalar(1) + (-x.flat().array()).exp());
    return y;
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx(dy.shape());
    const auto x = input_.flat().array();
    const auto s = (Scalar(1) / (Scalar(1) + (-x).exp())).eval();
    dx.flat().array() = dy.flat().array() * (s + x * s * (Scalar(1) - s));
    return dx;
  }
  template <typename Fn>
  void visit(const std::string&, Fn&&) {}
  void set_mode(const RunMode&) {}

 private:
  Tensor<Scalar> input_;
};

template <typename Scalar>
class Sigmoid {
 public:
  Shape output_shape(const Shape& in) const { return in; }
  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    output_ = Tensor<Scalar>(x.shape());
    output_.flat().array() = Scalar(1) / (Scalar(1) + (-x.flat().array()).exp());
    return output_;
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx(dy.shape());
    const auto s = output_.flat().array();
    dx.flat().array() = dy.flat().array() * s * (Scalar(1) - s);
    return dx;
  }
  template <typename Fn>
  void visit(const std::string&, Fn&&) {}
  void set_mode(const RunMode&) {}

 private:
  Tensor<Scalar> output_;
};

// Gated linear unit over the trailing axis: [a, g] -> a * sigmoid(g).
template <typename Scalar>
class Glu {
 public:
  Shape output_shape(Shape in) const {
    if (in.back() % 2) throw ShapeError("Glu: odd channel count");
    in.back() /= 2;
    return in;
  }
  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    input_ = x;
    Tensor<Scalar> y(output_shape(x.shape()));
    const Index h = y.dim(-1);
    const auto xm = x.matrix();
    y.matrix().array() =
        xm.leftCols(h).array() / (Scalar(1) + (-xm.rightCols(h).array()).exp());
    return y;
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx(input_.shape());
    const Index h = dy.dim(-1);
    const auto xm = input_.matrix();
    const auto g = dy.matrix().array();
    const RowMatrix<Scalar> s =
        (Scalar(1) / (Scalar(1) + (-xm.rightCols(h).array()).exp())).matrix();
    auto dxm = dx.matrix();
    dxm.leftCols(h).array() = g * s.array();
    dxm.rightCols(h).array() =
        g * xm.leftCols(h).array() * s.array() * (Scalar(1) - s.array());
    return dx;
  }
  template <typename Fn>
  void visit(const std::string&, Fn&&) {}
  void set_mode(const RunMode&) {}

 private:
  Tensor<Scalar> input_;
};

// Inverted dropout; the mask is a pure function of (mode seed, layer id,
// element index), so a training step is reproducible from its seed alone.
template <typename Scalar>
class Dropout {
 public:
  Dropout() = default;
  Dropout(double rate, Initializer& init) : rate_(rate), id_(init.next_layer_id()) {}

  Shape output_shape(const Shape& in) const { return in; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    if (!mode_.training || rate_ <= 0.0) {
      mask_ = Tensor<Scalar>();
      return x;
    }
    mask_ = Tensor<Scalar>(x.shape());
    const Scalar keep = Scalar(1.0 / (1.0 - rate_));
    const std::uint64_t stream = hash_combine(mode_.seed, id_);
    Tensor<Scalar> y(x.shape());
    for (Index i = 0; i < x.size(); ++i) {
      const double u = double(splitmix64(stream + std::uint64_t(i)) >> 11) * 0x1.0p-53;
      mask_[i] = u < rate_ ? Scalar(0) : keep;
      y[i] = x[i] * mask_[i];
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    if (mask_.empty()) return dy;
    Tensor<Scalar> dx(dy.shape());
    dx.flat().array() = dy.flat().array() * mask_.flat().array();
    return dx;
  }

  template <typename Fn>
  void visit(const std::string&, Fn&&) {}
  void set_mode(const RunMode& mode) { mode_ = mode; }

 private:
  double rate_ = 0.0;
  std::uint64_t id_ = 0;
  RunMode mode_;
  Tensor<Scalar> mask_;
};

// ------------------------------------------------------- DepthwiseConv1d

// Per-channel convolution along axis 1 of an S x L x C tensor with "same"
// zero padding (k/2 before, k/2 - (k+1)%2 after).
template <typename Scalar>
class DepthwiseConv1d {
 public:
  DepthwiseConv1d() = default;
  DepthwiseConv1d(Index channels, Index kernel, Initializer& init)
      : weight_({kernel, channels}), bias_({channels}) {
    const double bound = 1.0 / std::sqrt(double(kernel));
    init.fill_uniform(weight_.value, bound);
    init.fill_uniform(bias_.value, bound);
  }

  Index kernel() const { return weight_.value.dim(0); }
  Index channels() const { return weight_.value.dim(1); }
  Shape output_shape(const Shape& in) const { return in; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    require_rank(x, 3, "DepthwiseConv1d");
    if (x.dim(2) != channels()) throw ShapeError("DepthwiseConv1d: channels");
    input_ = x;
    const Index seqs = x.dim(0), len = x.dim(1), c = channels(), k = kernel();
    const Index pad = k / 2;
    Tensor<Scalar> y(x.shape());
    const Scalar* w = weight_.value.data();
    const Scalar* bias = bias_.value.data();
    for (Index s = 0; s < seqs; ++s)
      for (Index l = 0; l < len; ++l) {
        Scalar* out = y.data() + (s * len + l) * c;
        std::copy(bias, bias + c, out);
        const Index j0 = std::max<Index>(0, pad - l);
        const Index j1 = std::min<Index>(k, len + pad - l);
        for (Index j = j0; j < j1; ++j) {
          const Scalar* in = x.data() + (s * len + l + j - pad) * c;
          const Scalar* wj = w + j * c;
          for (Index ch = 0; ch < c; ++ch) out[ch] += wj[ch] * in[ch];
        }
      }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const Index seqs = dy.dim(0), len = dy.dim(1), c = channels(), k = kernel();
    const Index pad = k / 2;
    Tensor<Scalar> dx(dy.shape());
    const Scalar* w = weight_.value.data();
    Scalar* dw = weight_.grad.data();
    bias_.grad.flat() += dy.matrix().colwise().sum().transpose();
    for (Index s = 0; s < seqs; ++s)
      for (Index l = 0; l < len; ++l) {
        const Scalar* g = dy.data() + (s * len + l) * c;
        const Index j0 = std::max<Index>(0, pad - l);
        const Index j1 = std::min<Index>(k, len + pad - l);
        for (Index j = j0; j < j1; ++j) {
          const Index src = (s * len + l + j - pad) * c;
          const Scalar* in = input_.data() + src;
          Scalar* din = dx.data() + src;
          const Scalar* wj = w + j * c;
          Scalar* dwj = dw + j * c;
          for (Index ch = 0; ch < c; ++ch) {
            dwj[ch] += g[ch] * in[ch];
            din[ch] += g[ch] * wj[ch];
          }
        }
      }
    return dx;
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    fn(prefix + "weight", weight_);
    fn(prefix + "bias", bias_);
  }
  void set_mode(const RunMode&) {}

  Param<Scalar>& weight() { return weight_; }
  Param<Scalar>& bias() { return bias_; }

 private:
  Param<Scalar> weight_;
  Param<Scalar> bias_;
  Tensor<Scalar> input_;
};

}  // namespace cmgan

#endif  // CMGAN_NN_LAYERS_HPP_
