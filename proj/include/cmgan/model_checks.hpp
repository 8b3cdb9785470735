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

// Finite-difference checks for whole models and the random inputs they use.

#ifndef CMGAN_MODEL_CHECKS_HPP_
#define CMGAN_MODEL_CHECKS_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cmgan/discriminator.hpp"
#include "cmgan/generator.hpp"
#include "cmgan/nn/grad_check.hpp"

namespace cmgan {

inline Tensor<double> random_normal(Shape shape, std::uint64_t seed, double scale = 1.0) {
  Initializer rng(seed);
  Tensor<double> t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
  return t;
}

// A compressed-domain packed input (magnitude, real, imag) with a
// consistent magnitude channel.
inline Tensor<double> random_packed(Index b, Index t, Index f, std::uint64_t seed) {
  Tensor<double> ri = random_normal({b, t, f, 2}, seed, 0.5);
  Tensor<double> packed({b, t, f, 3});
  for (Index i = 0; i < b * t * f; ++i) {
    const double r = ri[2 * i], im = ri[2 * i + 1];
    packed[3 * i] = std::sqrt(r * r + im * im);
    packed[3 * i + 1] = r;
    packed[3 * i + 2] = im;
  }
  return packed;
}

// Finite-difference check of every parameter of `model` (and any extra
// tensors) for a scalar loss. `backward` must leave the analytic gradients
// of the parameters in p.grad and of the extras in `extra_grads`.
template <typename Model>
GradCheckReport check_model(Model& model, const std::function<double()>& loss,
                            const std::function<void()>& backward,
                            std::vector<std::pair<std::string, Tensor<double>*>> extras,
                            std::vector<Tensor<double>>* extra_grads,
                            const GradCheckOptions& opts) {
  Initializer rng(opts.seed);
  model.visit("", [](const std::string&, Param<double>& p) { p.grad.set_zero(); });
  backward();
  GradCheckReport report;
  bool first = true;
  model.visit("", [&](const std::string& name, Param<double>& p) {
    const Tensor<double> analytic = p.grad;
    report.entries.push_back(detail::check_tensor(name, p.value, analytic, loss, opts, rng,
                                                  first && opts.inject_fault));
    first = false;
  });
  for (std::size_t i = 0; i < extras.size(); ++i)
    report.entries.push_back(detail::check_tensor(extras[i].first, *extras[i].second,
                                                  (*extra_grads)[i], loss, opts, rng, false));
  return report;
}

// L = sum(r * D(ref, test)) over parameters and both inputs.
inline GradCheckReport check_discriminator(Discriminator<double>& d, Tensor<double> ref,
                                           Tensor<double> test, const GradCheckOptions& opts) {
  const Tensor<double> proj = random_normal({ref.dim(0), 1}, opts.seed + 1);
  auto loss = [&]() { return d.forward(ref, test).flat().dot(proj.flat()); };
  std::vector<Tensor<double>> grads(2);
  auto backward = [&]() {
    loss();
    auto [dr, dt] = d.backward(proj);
    grads = {dr, dt};
  };
  return check_model(d, loss, backward, {{"ref", &ref}, {"test", &test}}, &grads, opts);
}

// L = sum(r1 * ri) + sum(r2 * mag) of the recombined estimate, over the
// generator parameters.
inline GradCheckReport check_generator(Generator<double>& g, const Tensor<double>& packed,
                                       const GradCheckOptions& opts) {
  g.set_mode(RunMode{});
  const Index b = packed.dim(0), t = packed.dim(1), f = packed.dim(2);
  const Tensor<double> r_ri = random_normal({b, t, f, 2}, opts.seed + 1);
  const Tensor<double> r_mag = random_normal({b, t, f}, opts.seed + 2);
  auto loss = [&]() {
    const GeneratorOutput<double> out = g.forward(packed);
    return out.ri.flat().dot(r_ri.flat()) + out.mag.flat().dot(r_mag.flat());
  };
  auto backward = [&]() {
    loss();
    g.backward(r_ri, r_mag);
  };
  return check_model(g, loss, backward, {}, nullptr, opts);
}

}  // namespace cmgan

#endif  // CMGAN_MODEL_CHECKS_HPP_
