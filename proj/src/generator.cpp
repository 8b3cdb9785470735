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

#include "cmgan/generator.hpp"

#include <stdexcept>

namespace cmgan {

void GeneratorConfig::validate() const {
  if (channels < 4 || channels % 2)
    throw std::invalid_argument("generator channels must be even and >= 4");
  if (channels % heads)
    throw std::invalid_argument("generator channels must be divisible by the head count");
  if (blocks < 0) throw std::invalid_argument("generator blocks must be >= 0");
  if (freq_bins < 3 || freq_bins % 2 == 0)
    throw std::invalid_argument("generator frequency bins must be odd and >= 3");
  if (subpixel_channels < 0 || ff_mult < 1 || conv_kernel < 1)
    throw std::invalid_argument("invalid generator layer sizes");
  if (dropout < 0.0 || dropout >= 1.0)
    throw std::invalid_argument("dropout must be in [0, 1)");
}

ConformerConfig GeneratorConfig::conformer() const {
  ConformerConfig c;
  c.dim = channels;
  c.heads = heads;
  c.ff_mult = ff_mult;
  c.conv_kernel = conv_kernel;
  c.dropout = dropout;
  return c;
}

namespace {

Conv2dSpec pointwise(Index in, Index out) {
  Conv2dSpec s;
  s.in_channels = in;
  s.out_channels = out;
  return s;
}

// 1 x k kernel along frequency, no padding.
Conv2dSpec along_frequency(Index in, Index out, Index k) {
  Conv2dSpec s = pointwise(in, out);
  s.kernel_f = k;
  return s;
}

template <typename Scalar>
void walk_dense(const DilatedDenseBlock<Scalar>& d, const std::string& section,
                const Shape& in, std::vector<ShapeRow>& rows) {
  Shape s = in;
  for (Index i = 0; i < d.depth(); ++i) {
    Shape stage_in = in;
    stage_in.back() = d.channels() * (i + 1);
    s = d.stages()[i].output_shape(stage_in);
    rows.push_back({section, "Dil. Dense-" + std::to_string(i + 1), in, s});
  }
}

template <typename Scalar>
Tensor<Scalar> add(Tensor<Scalar> a, const Tensor<Scalar>& b) {
  a.flat() += b.flat();
  return a;
}

}  // namespace

// ------------------------------------------------------------------ Encoder

template <typename Scalar>
Encoder<Scalar>::Encoder(const GeneratorConfig& cfg, Initializer& init)
    : expand_(pointwise(3, cfg.channels), init),
      dense_(cfg.channels, init),
      halve_([&] {
        Conv2dSpec s = along_frequency(cfg.channels, cfg.channels, 3);
        s.stride_f = 2;
        s.pad_f_lo = 1;
        s.pad_f_hi = 1;
        return s;
      }(), init) {}

template <typename Scalar>
Tensor<Scalar> Encoder<Scalar>::forward(const Tensor<Scalar>& x) {
  return halve_.forward(dense_.forward(expand_.forward(x)));
}

template <typename Scalar>
Tensor<Scalar> Encoder<Scalar>::backward(const Tensor<Scalar>& dy) {
  return expand_.backward(dense_.backward(halve_.backward(dy)));
}

template <typename Scalar>
void Encoder<Scalar>::walk(Shape in, std::vector<ShapeRow>& rows) const {
  Shape s = expand_.output_shape(in);
  rows.push_back({"Encoder", "2D-Conv.", in, s});
  walk_dense(dense_, "Encoder", s, rows);
  rows.push_back({"Encoder", "2D-Conv.", s, halve_.output_shape(s)});
}

// ------------------------------------------------------------- MaskDecoder

template <typename Scalar>
MaskDecoder<Scalar>::MaskDecoder(const GeneratorConfig& cfg, Initializer& init)
    : dense_(cfg.channels, init),
      subpixel_(cfg.channels, cfg.upsampled_channels(), 2, init),
      squeeze_(along_frequency(cfg.upsampled_channels(), 1, 2), init),
      project_(pointwise(1, 1), init),
      act_(cfg.freq_bins, PReluAxis::kFrequency) {}

template <typename Scalar>
Tensor<Scalar> MaskDecoder<Scalar>::forward(const Tensor<Scalar>& x) {
  Tensor<Scalar> y = act_.forward(project_.forward(
      squeeze_.forward(subpixel_.forward(dense_.forward(x)))));
  return std::move(y).reshaped({y.dim(0), y.dim(1), y.dim(2)});
}

template <typename Scalar>
Tensor<Scalar> MaskDecoder<Scalar>::backward(const Tensor<Scalar>& dy) {
  const Tensor<Scalar> g = dy.reshaped({dy.dim(0), dy.dim(1), dy.dim(2), 1});
  return dense_.backward(subpixel_.backward(
      squeeze_.backward(project_.backward(act_.backward(g)))));
}

template <typename Scalar>
void MaskDecoder<Scalar>::walk(Shape in, std::vector<ShapeRow>& rows) const {
  walk_dense(dense_, "Mask Dec.", in, rows);
  Shape s = subpixel_.output_shape(in);
  rows.push_back({"Mask Dec.", "Sub-pixel", in, s});
  const Shape sq = squeeze_.output_shape(s);
  rows.push_back({"Mask Dec.", "2D-Conv.", s, sq});
  const Shape pr = project_.output_shape(sq);
  rows.push_back({"Mask Dec.", "1x1 Conv.", sq, pr});
  rows.push_back({"Mask Dec.", "PReLU", pr, pr});
}

// ---------------------------------------------------------- ComplexDecoder

template <typename Scalar>
ComplexDecoder<Scalar>::ComplexDecoder(const GeneratorConfig& cfg,
                                       Initializer& init)
    : dense_(cfg.channels, init),
      subpixel_(cfg.channels, cfg.upsampled_channels(), 2, init),
      norm_(cfg.upsampled_channels()),
      act_(cfg.upsampled_channels(), PReluAxis::kChannel),
      project_(along_frequency(cfg.upsampled_channels(), 2, 2), init) {}

template <typename Scalar>
Tensor<Scalar> ComplexDecoder<Scalar>::forward(const Tensor<Scalar>& x) {
  return project_.forward(
      act_.forward(norm_.forward(subpixel_.forward(dense_.forward(x)))));
}

template <typename Scalar>
Tensor<Scalar> ComplexDecoder<Scalar>::backward(const Tensor<Scalar>& dy) {
  return dense_.backward(subpixel_.backward(
      norm_.backward(act_.backward(project_.backward(dy)))));
}

template <typename Scalar>
void ComplexDecoder<Scalar>::walk(Shape in, std::vector<ShapeRow>& rows) const {
  walk_dense(dense_, "Complex Dec.", in, rows);
  Shape s = subpixel_.output_shape(in);
  rows.push_back({"Complex Dec.", "Sub-pixel", in, s});
  rows.push_back({"Complex Dec.", "Norm + PReLU", s, s});
  rows.push_back({"Complex Dec.", "2D-Conv.", s, project_.output_shape(s)});
}

// --------------------------------------------------------------- Generator

template <typename Scalar>
Generator<Scalar>::Generator(const GeneratorConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), recombiner_(cfg.mask_mode) {
  cfg_.validate();
  Initializer init(seed);
  encoder_ = Encoder<Scalar>(cfg_, init);
  for (Index i = 0; i < cfg_.blocks; ++i)
    conformers_.emplace_back(cfg_.conformer(), init);
  mask_ = MaskDecoder<Scalar>(cfg_, init);
  complex_ = ComplexDecoder<Scalar>(cfg_, init);
}

template <typename Scalar>
void Generator<Scalar>::set_mode(const RunMode& mode) {
  mode_ = mode;
  for (Index i = 0; i < Index(conformers_.size()); ++i) {
    RunMode m = mode;
    m.seed = hash_combine(mode.seed, std::uint64_t(i));
    conformers_[i].set_mode(m);
  }
}

template <typename Scalar>
Tensor<Scalar> Generator<Scalar>::transform(const Tensor<Scalar>& features) {
  Tensor<Scalar> h = features;
  for (auto& c : conformers_) h = c.forward(h);
  return h;
}

template <typename Scalar>
GeneratorOutput<Scalar> Generator<Scalar>::forward(const Tensor<Scalar>& packed) {
  require_rank(packed, 4, "Generator input");
  if (packed.dim(2) != cfg_.freq_bins || packed.dim(3) != 3)
    throw ShapeError("Generator: expected B x T x " + std::to_string(cfg_.freq_bins) +
                     " x 3 input, got " + to_string(packed.shape()));
  const Tensor<Scalar> h = transform(encoder_.forward(packed));
  GeneratorOutput<Scalar> out;
  out.mask = mask_.forward(h);
  out.residual = complex_.forward(h);
  Recombined<Scalar> r = recombiner_.forward(out.mask, out.residual, packed);
  out.ri = std::move(r.ri);
  out.mag = std::move(r.mag);
  return out;
}

template <typename Scalar>
void Generator<Scalar>::backward(const Tensor<Scalar>& grad_ri,
                                 const Tensor<Scalar>& grad_mag) {
  auto [d_mask, d_res] = recombiner_.backward(grad_ri, grad_mag);
  Tensor<Scalar> g = add(mask_.backward(d_mask), complex_.backward(d_res));
  for (auto it = conformers_.rbegin(); it != conformers_.rend(); ++it)
    g = it->backward(g);
  encoder_.backward(g);
}

template <typename Scalar>
std::vector<ShapeRow> Generator<Scalar>::shape_walk(Index batch, Index frames) const {
  std::vector<ShapeRow> rows;
  const Shape in{batch, frames, cfg_.freq_bins, 3};
  encoder_.walk(in, rows);
  const Shape s = rows.back().output;
  const Index b = s[0], t = s[1], f = s[2], c = s[3];
  for (Index i = 0; i < cfg_.blocks; ++i) {
    const std::string section = "TS-Conf. " + std::to_string(i + 1);
    const Shape time{b * f, t, c}, freq{b * t, f, c};
    rows.push_back({section, "Reshape", s, time});
    rows.push_back({section, "Time-Conf.", time, time});
    rows.push_back({section, "Reshape", time, freq});
    rows.push_back({section, "Freq.-Conf.", freq, freq});
    rows.push_back({section, "Reshape", freq, s});
  }
  mask_.walk(s, rows);
  complex_.walk(s, rows);
  return rows;
}

template <typename Scalar>
Waveform enhance(Generator<Scalar>& g, const Waveform& w, const StftConfig& cfg) {
  validate(w);
  Waveform in = w;
  if (in.sample_rate != kModelRate) {
    if (g.config().mask_mode != MaskMode::kAdd || kModelRate % in.sample_rate)
      throw std::invalid_argument("enhance: sample rate " +
                                  std::to_string(in.sample_rate) +
                                  " does not match the model rate 16000");
    in = resample(in, kModelRate);
  }
  const RunMode previous = g.mode();
  g.set_mode(RunMode{});
  const GeneratorOutput<Scalar> out =
      g.forward(pack_input<Scalar>(compress(stft(in, cfg))));
  g.set_mode(previous);
  return synthesize(out.ri, cfg, in.size(), kModelRate).front();
}

template class Encoder<float>;
template class Encoder<double>;
template class MaskDecoder<float>;
template class MaskDecoder<double>;
template class ComplexDecoder<float>;
template class ComplexDecoder<double>;
template class Generator<float>;
template class Generator<double>;
template Waveform enhance(Generator<float>&, const Waveform&, const StftConfig&);
template Waveform enhance(Generator<double>&, const Waveform&, const StftConfig&);

}  // namespace cmgan
