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

// Central finite-difference verification of analytic gradients.

#ifndef CMGAN_NN_GRAD_CHECK_HPP_
#define CMGAN_NN_GRAD_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cmgan/nn/module.hpp"
#include "cmgan/nn/tensor.hpp"

namespace cmgan {

struct GradCheckOptions {
  double step = 1e-5;
  // Entries sampled per tensor; 0 checks every entry.
  Index max_entries = 0;
  std::uint64_t seed = 7;
  // A coordinate whose central quotients at h and h/2 disagree by more than
  // kink_tolerance, or whose one-sided quotients disagree by more than
  // one_sided_tolerance (both relative), straddles a kink and is excluded.
  double kink_tolerance = 1e-6;
  double one_sided_tolerance = 1e-3;
  // Denominator floor, so structurally-zero gradients compare absolutely.
  double scale_floor = 1e-6;
  // Corrupts the analytic gradient of the first tensor; used to prove that
  // the harness detects broken backward passes.
  bool inject_fault = false;
};

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  Index checked = 0;
  Index excluded = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;

  double max_rel_error() const {
    double e = 0.0;
    for (const auto& x : entries) e = std::max(e, x.max_rel_error);
    return e;
  }
  bool passed(double tolerance) const { return max_rel_error() < tolerance; }
};

// ||a - n||_inf / max(||a||_inf, ||n||_inf, floor) over the listed entries.
// Each |a_i - n_i| is first reduced by the estimated floating-point
// uncertainty u_i of the difference quotient, when given.
inline double gradient_relative_error(const std::vector<double>& analytic,
                                      const std::vector<double>& numeric,
                                      double floor,
                                      const std::vector<double>& uncertainty = {}) {
  double diff = 0.0, scale = floor;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double u = i < uncertainty.size() ? uncertainty[i] : 0.0;
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]) - u);
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  return diff / scale;
}

namespace detail {

inline std::vector<Index> sample_entries(Index size, Index max_entries,
                                         Initializer& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(size));
  for (Index i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (max_entries <= 0 || max_entries >= size) return idx;
  for (Index i = 0; i < max_entries; ++i) {
    const Index j = i + static_cast<Index>(rng.uniform() * double(size - i));
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(std::min(j, size - 1))]);
  }
  idx.resize(static_cast<std::size_t>(max_entries));
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Compares `analytic` against central differences of `loss` obtained by
// perturbing `values` in place.
inline GradCheckEntry check_tensor(const std::string& name,
                                   Tensor<double>& values,
                                   const Tensor<double>& analytic,
                                   const std::function<double()>& loss,
                                   const GradCheckOptions& opts,
                                   Initializer& rng, bool corrupt) {
  GradCheckEntry entry{name};
  std::vector<double> a, n, u;
  const double h = opts.step;
  for (Index i : sample_entries(values.size(), opts.max_entries, rng)) {
    const double orig = values[i];
    auto at = [&](double delta) {
      values[i] = orig + delta;
      return loss();
    };
    const double f_plus = at(h), f_minus = at(-h), f_mid = at(0.0);
    const double fd_h = (f_plus - f_minus) / (2 * h);
    const double fd_half = (at(h / 2) - at(-h / 2)) / h;
    const double one_sided_gap = std::abs((f_plus - f_mid) - (f_mid - f_minus)) / h;
    values[i] = orig;
    const double scale = std::max(1.0, std::abs(fd_half));
    if (std::abs(fd_h - fd_half) > opts.kink_tolerance * scale ||
        one_sided_gap > opts.one_sided_tolerance * scale) {
      ++entry.excluded;
      continue;
    }
    a.push_back(analytic[i]);
    n.push_back(fd_h);
    // Rounding of the loss evaluations, amplified by 1/2h.
    const double eps = std::numeric_limits<double>::epsilon();
    u.push_back(8.0 * eps * std::max({std::abs(f_plus), std::abs(f_minus), 1.0}) / h);
  }
  if (corrupt && !a.empty()) {
    double peak = opts.scale_floor;
    for (double v : a) peak = std::max(peak, std::abs(v));
    a.front() += 0.01 * peak;
  }
  entry.checked = static_cast<Index>(a.size());
  entry.max_rel_error = gradient_relative_error(a, n, opts.scale_floor, u);
  return entry;
}

}  // namespace detail

// Checks every parameter of `model` and its input against central
// differences of L = sum(r * model.forward(x)), with r a fixed random
// projection (a plain sum would make the check blind after normalization
// layers, whose outputs sum to a constant).
template <typename Model>
GradCheckReport grad_check(Model& model, const Tensor<double>& input,
                           const GradCheckOptions& opts = {}) {
  Initializer rng(opts.seed);
  model.set_mode(RunMode{});
  model.visit("", [](const std::string&, Param<double>& p) { p.grad.set_zero(); });

  Tensor<double> x = input;
  const Tensor<double> y0 = model.forward(x);
  Tensor<double> proj(y0.shape());
  for (Index i = 0; i < proj.size(); ++i) proj[i] = rng.normal();
  const Tensor<double> dx = model.backward(proj);

  auto loss = [&]() {
    const Tensor<double> y = model.forward(x);
    return y.flat().dot(proj.flat());
  };

  GradCheckReport report;
  bool first = true;
  model.visit("", [&](const std::string& name, Param<double>& p) {
    const Tensor<double> analytic = p.grad;
    report.entries.push_back(detail::check_tensor(
        name, p.value, analytic, loss, opts, rng, first && opts.inject_fault));
    first = false;
  });
  report.entries.push_back(
      detail::check_tensor("input", x, dx, loss, opts, rng, first && opts.inject_fault));
  return report;
}

// Same comparison for a scalar function with a caller-supplied gradient.
inline GradCheckEntry check_scalar_function(
    const std::string& name, Tensor<double> x, const Tensor<double>& analytic,
    const std::function<double(const Tensor<double>&)>& f,
    const GradCheckOptions& opts = {}) {
  Initializer rng(opts.seed);
  return detail::check_tensor(name, x, analytic, [&]() { return f(x); }, opts,
                              rng, opts.inject_fault);
}

}  // namespace cmgan

#endif  // CMGAN_NN_GRAD_CHECK_HPP_
