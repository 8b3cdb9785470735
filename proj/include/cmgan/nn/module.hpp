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

#ifndef CMGAN_NN_MODULE_HPP_
#define CMGAN_NN_MODULE_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "cmgan/nn/tensor.hpp"

namespace cmgan {

// Learnable tensor with its accumulated gradient.
template <typename Scalar>
struct Param {
  Param() = default;
  explicit Param(Shape shape, Scalar fill = Scalar(0))
      : value(shape, fill), grad(shape) {}

  Tensor<Scalar> value;
  Tensor<Scalar> grad;
};

// Every module in this library follows the same contract:
//
//   Tensor forward(const Tensor& x);      // caches what backward needs
//   Tensor backward(const Tensor& dy);    // returns dL/dx, accumulates grads
//   template <class Fn> void visit(const std::string& prefix, Fn&& fn);
//   void set_mode(const RunMode& mode);
//
// `visit` calls fn(name, Param&) for every parameter in a fixed order, which
// is what checkpoints and optimizers rely on. backward() must follow the
// matching forward() on the same instance.
struct RunMode {
  bool training = false;
  // Seeds dropout masks; masks are a pure function of (seed, layer id, index).
  std::uint64_t seed = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

// Deterministic, platform-independent random source for initialization.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : state_(seed) {}

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename Scalar>
  void fill_uniform(Tensor<Scalar>& t, double bound) {
    for (Index i = 0; i < t.size(); ++i)
      t[i] = static_cast<Scalar>(uniform(-bound, bound));
  }

  // Stable identifier for stochastic layers (dropout).
  std::uint64_t next_layer_id() { return ++layer_ids_; }

 private:
  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64(state_);
  }

  std::uint64_t state_;
  std::uint64_t layer_ids_ = 0;
};

template <typename Scalar>
inline Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

}  // namespace cmgan

#endif  // CMGAN_NN_MODULE_HPP_
