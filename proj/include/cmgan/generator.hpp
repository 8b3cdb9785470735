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

// The generator: encoder, a stack of two-stage conformers, and the mask and
// complex decoders sharing that trunk, followed by recombination with the
// noisy spectrogram.

#ifndef CMGAN_GENERATOR_HPP_
#define CMGAN_GENERATOR_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "cmgan/dsp.hpp"
#include "cmgan/nn/blocks.hpp"
#include "cmgan/nn/conformer.hpp"
#include "cmgan/spectral.hpp"

namespace cmgan {

struct GeneratorConfig {
  Index channels = 64;
  Index blocks = 4;
  Index freq_bins = 201;
  // Channels after the sub-pixel shuffle; 0 means 4 * channels.
  Index subpixel_channels = 0;
  MaskMode mask_mode = MaskMode::kMultiply;
  Index heads = 4;
  Index ff_mult = 4;
  Index conv_kernel = 31;
  double dropout = 0.0;

  void validate() const;
  Index encoded_bins() const { return (freq_bins - 1) / 2 + 1; }
  Index upsampled_channels() const {
    return subpixel_channels > 0 ? subpixel_channels : 4 * channels;
  }
  ConformerConfig conformer() const;
  bool operator==(const GeneratorConfig&) const = default;
};

// One row of a layer-by-layer shape listing.
struct ShapeRow {
  std::string section;
  std::string layer;
  Shape input;
  Shape output;
};

template <typename Scalar>
class Encoder {
 public:
  Encoder() = default;
  Encoder(const GeneratorConfig& cfg, Initializer& init);

  Tensor<Scalar> forward(const Tensor<Scalar>& x);
  Tensor<Scalar> backward(const Tensor<Scalar>& dy);
  void walk(Shape in, std::vector<ShapeRow>& rows) const;

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    expand_.visit(prefix + "expand.", fn);
    dense_.visit(prefix + "dense.", fn);
    halve_.visit(prefix + "halve.", fn);
  }

 private:
  ConvBlock<Scalar> expand_;
  DilatedDenseBlock<Scalar> dense_;
  ConvBlock<Scalar> halve_;
};

// Dense block -> sub-pixel -> conv block squeezing to one channel -> 1x1 conv
// -> PReLU with one slope per frequency bin. Output B x T x F.
template <typename Scalar>
class MaskDecoder {
 public:
  MaskDecoder() = default;
  MaskDecoder(const GeneratorConfig& cfg, Initializer& init);

  Tensor<Scalar> forward(const Tensor<Scalar>& x);
  Tensor<Scalar> backward(const Tensor<Scalar>& dy);
  void walk(Shape in, std::vector<ShapeRow>& rows) const;

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    dense_.visit(prefix + "dense.", fn);
    subpixel_.visit(prefix + "subpixel.", fn);
    squeeze_.visit(prefix + "squeeze.", fn);
    project_.visit(prefix + "project.", fn);
    act_.visit(prefix + "prelu.", fn);
  }

  Conv2d<Scalar>& project() { return project_; }
  PRelu<Scalar>& prelu() { return act_; }

 private:
  DilatedDenseBlock<Scalar> dense_;
  SubPixelConv<Scalar> subpixel_;
  ConvBlock<Scalar> squeeze_;
  Conv2d<Scalar> project_;
  PRelu<Scalar> act_;
};

// Same trunk as the mask decoder without an output activation. Output
// B x T x F x 2 (real, imaginary).
template <typename Scalar>
class ComplexDecoder {
 public:
  ComplexDecoder() = default;
  ComplexDecoder(const GeneratorConfig& cfg, Initializer& init);

  Tensor<Scalar> forward(const Tensor<Scalar>& x);
  Tensor<Scalar> backward(const Tensor<Scalar>& dy);
  void walk(Shape in, std::vector<ShapeRow>& rows) const;

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    dense_.visit(prefix + "dense.", fn);
    subpixel_.visit(prefix + "subpixel.", fn);
    norm_.visit(prefix + "norm.", fn);
    act_.visit(prefix + "prelu.", fn);
    project_.visit(prefix + "project.", fn);
  }

  Conv2d<Scalar>& project() { return project_; }

 private:
  DilatedDenseBlock<Scalar> dense_;
  SubPixelConv<Scalar> subpixel_;
  InstanceNorm<Scalar> norm_;
  PRelu<Scalar> act_;
  Conv2d<Scalar> project_;
};

template <typename Scalar>
struct GeneratorOutput {
  Tensor<Scalar> mask;      // B x T x F: mask, or additive offset
  Tensor<Scalar> residual;  // B x T x F x 2
  Tensor<Scalar> ri;        // B x T x F x 2 recombined estimate
  Tensor<Scalar> mag;       // B x T x F
};

template <typename Scalar>
class Generator {
 public:
  explicit Generator(const GeneratorConfig& cfg = {}, std::uint64_t seed = 0);

  const GeneratorConfig& config() const { return cfg_; }

  // packed: B x T x F x 3 compressed (magnitude, real, imag).
  GeneratorOutput<Scalar> forward(const Tensor<Scalar>& packed);
  // Accumulates parameter gradients from d ri and d mag of the last forward.
  void backward(const Tensor<Scalar>& grad_ri, const Tensor<Scalar>& grad_mag);

  Tensor<Scalar> encode(const Tensor<Scalar>& packed) { return encoder_.forward(packed); }
  Tensor<Scalar> transform(const Tensor<Scalar>& features);

  // Layer-by-layer shapes for a B x T input, derived from the modules.
  std::vector<ShapeRow> shape_walk(Index batch, Index frames) const;

  void set_mode(const RunMode& mode);
  const RunMode& mode() const { return mode_; }

  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    encoder_.visit(prefix + "encoder.", fn);
    for (std::size_t i = 0; i < conformers_.size(); ++i)
      conformers_[i].visit(prefix + "tsconformer" + std::to_string(i) + ".", fn);
    mask_.visit(prefix + "mask_decoder.", fn);
    complex_.visit(prefix + "complex_decoder.", fn);
  }

  MaskDecoder<Scalar>& mask_decoder() { return mask_; }
  ComplexDecoder<Scalar>& complex_decoder() { return complex_; }

 private:
  GeneratorConfig cfg_;
  RunMode mode_;
  Encoder<Scalar> encoder_;
  std::vector<TwoStageConformer<Scalar>> conformers_;
  MaskDecoder<Scalar> mask_;
  ComplexDecoder<Scalar> complex_;
  Recombiner<Scalar> recombiner_;
};

template <typename Model>
Index parameter_count(Model& model) {
  Index n = 0;
  model.visit("", [&](const std::string&, auto& p) { n += p.value.size(); });
  return n;
}

template <typename Model>
void zero_grad(Model& model) {
  model.visit("", [](const std::string&, auto& p) { p.grad.set_zero(); });
}

// Full inference pipeline on one track: STFT, compression, generator,
// recombination, decompression, ISTFT. Add-mode models accept inputs whose
// rate divides 16 kHz and upsample them first; otherwise the rate must be
// 16 kHz. Output is 16 kHz with the (upsampled) input length.
template <typename Scalar>
Waveform enhance(Generator<Scalar>& g, const Waveform& w, const StftConfig& cfg = {});

inline constexpr int kModelRate = 16000;

}  // namespace cmgan

#endif  // CMGAN_GENERATOR_HPP_
