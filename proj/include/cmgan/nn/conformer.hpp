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

#ifndef CMGAN_NN_CONFORMER_HPP_
#define CMGAN_NN_CONFORMER_HPP_

#include <cmath>
#include <string>

#include "cmgan/nn/layers.hpp"

namespace cmgan {

template <typename Scalar>
void add_scaled(Tensor<Scalar>& acc, const Tensor<Scalar>& t, Scalar scale) {
  if (acc.shape() != t.shape()) throw ShapeError("add_scaled: shape mismatch");
  acc.flat() += scale * t.flat();
}

template <typename Scalar>
Tensor<Scalar> scaled(Tensor<Scalar> t, Scalar scale) {
  t.flat() *= scale;
  return t;
}

// Multi-head self-attention over axis 1 of an S x L x C tensor. No positional
// encoding; the conformer convolution module supplies locality.
template <typename Scalar>
class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(Index dim, Index heads, Initializer& init)
      : heads_(heads),
        query_(dim, dim, init, false),
        key_(dim, dim, init, false),
        value_(dim, dim, init, false),
        out_(dim, dim, init, true) {
    if (heads <= 0 || dim % heads)
      throw ShapeError("MultiHeadSelfAttention: dim must divide into heads");
  }

  Index heads() const { return heads_; }
  Index head_dim() const { return query_.out_features() / heads_; }
  Shape output_shape(const Shape& in) const { return in; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    require_rank(x, 3, "MultiHeadSelfAttention");
    q_ = query_.forward(x);
    k_ = key_.forward(x);
    v_ = value_.forward(x);
    Tensor<Scalar> o(x.shape());
    const Index seqs = x.dim(0), len = x.dim(1), d = head_dim();
    auto qm = q_.matrix();
    auto km = k_.matrix();
    auto vm = v_.matrix();
    auto om = o.matrix();
    RowMatrix<Scalar> attn;
    for (Index s = 0; s < seqs; ++s)
      for (Index h = 0; h < heads_; ++h) {
        scores(qm.block(s * len, h * d, len, d), km.block(s * len, h * d, len, d), attn);
        om.block(s * len, h * d, len, d).noalias() =
            attn * vm.block(s * len, h * d, len, d);
      }
    return out_.forward(o);
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const Tensor<Scalar> d_o = out_.backward(dy);
    Tensor<Scalar> dq(q_.shape()), dk(k_.shape()), dv(v_.shape());
    const Index seqs = q_.dim(0), len = q_.dim(1), d = head_dim();
    const Scalar scale = Scalar(1) / std::sqrt(Scalar(d));
    const auto qm = q_.matrix();
    const auto km = k_.matrix();
    const auto vm = v_.matrix();
    const auto dom = d_o.matrix();
    auto dqm = dq.matrix();
    auto dkm = dk.matrix();
    auto dvm = dv.matrix();
    RowMatrix<Scalar> attn, da;
    for (Index s = 0; s < seqs; ++s)
      for (Index h = 0; h < heads_; ++h) {
        const auto qb = qm.block(s * len, h * d, len, d);
        const auto kb = km.block(s * len, h * d, len, d);
        const auto vb = vm.block(s * len, h * d, len, d);
        const auto gb = dom.block(s * len, h * d, len, d);
        scores(qb, kb, attn);
        da.noalias() = gb * vb.transpose();
        dvm.block(s * len, h * d, len, d).noalias() = attn.transpose() * gb;
        // softmax Jacobian: dS = A * (dA - rowsum(dA * A))
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_dot =
            (da.array() * attn.array()).rowwise().sum();
        da = (attn.array() * (da.array().colwise() - row_dot.array())).matrix();
        dqm.block(s * len, h * d, len, d).noalias() = scale * (da * kb);
        dkm.block(s * len, h * d, len, d).noalias() = scale * (da.transpose() * qb);
      }
    Tensor<Scalar> dx = query_.backward(dq);
    dx.flat() += key_.backward(dk).flat();
    dx.flat() += value_.backward(dv).flat();
    return dx;
  }

  // Attention matrix of sequence s, head h from the last forward pass.
  RowMatrix<Scalar> attention(Index s, Index h) const {
    const Index len = q_.dim(1), d = head_dim();
    RowMatrix<Scalar> attn;
    scores(q_.matrix().block(s * len, h * d, len, d),
           k_.matrix().block(s * len, h * d, len, d), attn);
    return attn;
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    query_.visit(prefix + "query.", fn);
    key_.visit(prefix + "key.", fn);
    value_.visit(prefix + "value.", fn);
    out_.visit(prefix + "out.", fn);
  }
  void set_mode(const RunMode&) {}

 private:
  template <typename Q, typename K>
  void scores(const Q& q, const K& k, RowMatrix<Scalar>& attn) const {
    const Scalar scale = Scalar(1) / std::sqrt(Scalar(q.cols()));
    attn.noalias() = scale * (q * k.transpose());
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_max = attn.rowwise().maxCoeff();
    attn = (attn.colwise() - row_max).array().exp().matrix();
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_sum = attn.rowwise().sum();
    attn.array().colwise() /= row_sum.array();
  }

  Index heads_ = 4;
  Linear<Scalar> query_, key_, value_, out_;
  Tensor<Scalar> q_, k_, v_;
};

struct ConformerConfig {
  Index dim = 64;
  Index heads = 4;
  Index ff_mult = 4;
  Index conv_expansion = 2;
  Index conv_kernel = 31;
  double dropout = 0.0;
};

// LN -> Linear(C, mC) -> swish -> dropout -> Linear(mC, C) -> dropout.
template <typename Scalar>
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(const ConformerConfig& cfg, Initializer& init)
      : norm_(cfg.dim),
        up_(cfg.dim, cfg.dim * cfg.ff_mult, init),
        drop1_(cfg.dropout, init),
        down_(cfg.dim * cfg.ff_mult, cfg.dim, init),
        drop2_(cfg.dropout, init) {}

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    return drop2_.forward(down_.forward(
        drop1_.forward(act_.forward(up_.forward(norm_.forward(x))))));
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    return norm_.backward(up_.backward(act_.backward(
        drop1_.backward(down_.backward(drop2_.backward(dy))))));
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    norm_.visit(prefix + "norm.", fn);
    up_.visit(prefix + "up.", fn);
    down_.visit(prefix + "down.", fn);
  }
  void set_mode(const RunMode& m) {
    drop1_.set_mode(m);
    drop2_.set_mode(m);
  }

  Linear<Scalar>& last_linear() { return down_; }

 private:
  LayerNorm<Scalar> norm_;
  Linear<Scalar> up_;
  Swish<Scalar> act_;
  Dropout<Scalar> drop1_;
  Linear<Scalar> down_;
  Dropout<Scalar> drop2_;
};

// LN -> MHSA -> dropout.
template <typename Scalar>
class AttentionModule {
 public:
  AttentionModule() = default;
  AttentionModule(const ConformerConfig& cfg, Initializer& init)
      : norm_(cfg.dim), attn_(cfg.dim, cfg.heads, init), drop_(cfg.dropout, init) {}

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    return drop_.forward(attn_.forward(norm_.forward(x)));
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    return norm_.backward(attn_.backward(drop_.backward(dy)));
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    norm_.visit(prefix + "norm.", fn);
    attn_.visit(prefix + "mhsa.", fn);
  }
  void set_mode(const RunMode& m) { drop_.set_mode(m); }

  MultiHeadSelfAttention<Scalar>& attention() { return attn_; }

 private:
  LayerNorm<Scalar> norm_;
  MultiHeadSelfAttention<Scalar> attn_;
  Dropout<Scalar> drop_;
};

// LN -> pointwise (C -> 2eC) -> GLU -> depthwise conv -> swish ->
// pointwise (eC -> C) -> dropout.
template <typename Scalar>
class ConvolutionModule {
 public:
  ConvolutionModule() = default;
  ConvolutionModule(const ConformerConfig& cfg, Initializer& init)
      : norm_(cfg.dim),
        expand_(cfg.dim, 2 * cfg.conv_expansion * cfg.dim, init),
        depthwise_(cfg.conv_expansion * cfg.dim, cfg.conv_kernel, init),
        project_(cfg.conv_expansion * cfg.dim, cfg.dim, init),
        drop_(cfg.dropout, init) {}

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    return drop_.forward(project_.forward(act_.forward(depthwise_.forward(
        glu_.forward(expand_.forward(norm_.forward(x)))))));
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    return norm_.backward(expand_.backward(glu_.backward(depthwise_.backward(
        act_.backward(project_.backward(drop_.backward(dy)))))));
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    norm_.visit(prefix + "norm.", fn);
    expand_.visit(prefix + "pointwise1.", fn);
    depthwise_.visit(prefix + "depthwise.", fn);
    project_.visit(prefix + "pointwise2.", fn);
  }
  void set_mode(const RunMode& m) { drop_.set_mode(m); }

  Linear<Scalar>& last_linear() { return project_; }

 private:
  LayerNorm<Scalar> norm_;
  Linear<Scalar> expand_;
  Glu<Scalar> glu_;
  DepthwiseConv1d<Scalar> depthwise_;
  Swish<Scalar> act_;
  Linear<Scalar> project_;
  Dropout<Scalar> drop_;
};

// x + FFN/2 -> + MHSA -> + conv module -> + FFN/2 -> LayerNorm.
template <typename Scalar>
class ConformerBlock {
 public:
  ConformerBlock() = default;
  ConformerBlock(const ConformerConfig& cfg, Initializer& init)
      : ff1_(cfg, init),
        attn_(cfg, init),
        conv_(cfg, init),
        ff2_(cfg, init),
        norm_(cfg.dim) {}

  Shape output_shape(const Shape& in) const { return in; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    require_rank(x, 3, "ConformerBlock");
    const Scalar half(0.5);
    Tensor<Scalar> h = x;
    add_scaled(h, ff1_.forward(h), half);
    add_scaled(h, attn_.forward(h), Scalar(1));
    add_scaled(h, conv_.forward(h), Scalar(1));
    add_scaled(h, ff2_.forward(h), half);
    return norm_.forward(h);
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const Scalar half(0.5);
    Tensor<Scalar> g = norm_.backward(dy);
    add_scaled(g, ff2_.backward(scaled(g, half)), Scalar(1));
    add_scaled(g, conv_.backward(g), Scalar(1));
    add_scaled(g, attn_.backward(g), Scalar(1));
    add_scaled(g, ff1_.backward(scaled(g, half)), Scalar(1));
    return g;
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    ff1_.visit(prefix + "ff1.", fn);
    attn_.visit(prefix + "attn.", fn);
    conv_.visit(prefix + "conv.", fn);
    ff2_.visit(prefix + "ff2.", fn);
    norm_.visit(prefix + "norm.", fn);
  }
  void set_mode(const RunMode& m) {
    ff1_.set_mode(m);
    attn_.set_mode(m);
    conv_.set_mode(m);
    ff2_.set_mode(m);
  }

  FeedForward<Scalar>& ff1() { return ff1_; }
  FeedForward<Scalar>& ff2() { return ff2_; }
  AttentionModule<Scalar>& attention() { return attn_; }
  ConvolutionModule<Scalar>& convolution() { return conv_; }

 private:
  FeedForward<Scalar> ff1_;
  AttentionModule<Scalar> attn_;
  ConvolutionModule<Scalar> conv_;
  FeedForward<Scalar> ff2_;
  LayerNorm<Scalar> norm_;
};

// Time conformer over (B F') x T x C, then frequency conformer over
// (B T) x F' x C, each wrapped in an outer residual connection.
template <typename Scalar>
class TwoStageConformer {
 public:
  TwoStageConformer() = default;
  TwoStageConformer(const ConformerConfig& cfg, Initializer& init)
      : time_(cfg, init), freq_(cfg, init) {}

  Shape output_shape(const Shape& in) const { return in; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    require_rank(x, 4, "TwoStageConformer");
    const Index b = x.dim(0), t = x.dim(1), f = x.dim(2), c = x.dim(3);
    Tensor<Scalar> seq_t = swap_middle_axes(x).reshape({b * f, t, c});
    add_scaled(seq_t, time_.forward(seq_t), Scalar(1));
    Tensor<Scalar> seq_f =
        swap_middle_axes(seq_t.reshape({b, f, t, c})).reshape({b * t, f, c});
    add_scaled(seq_f, freq_.forward(seq_f), Scalar(1));
    return std::move(seq_f).reshaped({b, t, f, c});
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const Index b = dy.dim(0), t = dy.dim(1), f = dy.dim(2), c = dy.dim(3);
    Tensor<Scalar> g_f = dy.reshaped({b * t, f, c});
    add_scaled(g_f, freq_.backward(g_f), Scalar(1));
    Tensor<Scalar> g_t =
        swap_middle_axes(g_f.reshape({b, t, f, c})).reshape({b * f, t, c});
    add_scaled(g_t, time_.backward(g_t), Scalar(1));
    return swap_middle_axes(g_t.reshape({b, f, t, c}));
  }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    time_.visit(prefix + "time.", fn);
    freq_.visit(prefix + "freq.", fn);
  }
  void set_mode(const RunMode& m) {
    time_.set_mode(m);
    freq_.set_mode(m);
  }

  ConformerBlock<Scalar>& time_block() { return time_; }
  ConformerBlock<Scalar>& freq_block() { return freq_; }

 private:
  ConformerBlock<Scalar> time_;
  ConformerBlock<Scalar> freq_;
};

}  // namespace cmgan

#endif  // CMGAN_NN_CONFORMER_HPP_
