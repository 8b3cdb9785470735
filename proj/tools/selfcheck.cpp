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

#include "selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "cmgan/discriminator.hpp"
#include "cmgan/dsp.hpp"
#include "cmgan/losses.hpp"
#include "cmgan/metrics.hpp"
#include "cmgan/model_checks.hpp"
#include "cmgan/nn/blocks.hpp"
#include "cmgan/nn/conformer.hpp"
#include "cmgan/nn/grad_check.hpp"
#include "cmgan/nn/layers.hpp"
#include "reference.hpp"

namespace cmgan {
namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kStftTolerance = 1e-6;
constexpr double kOracleTolerance = 1e-6;

std::string format(const char* fmt, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), fmt, a, b);
  return buf;
}

CheckResult below(std::string suite, std::string name, double value, double threshold,
                  std::string detail = {}) {
  return {std::move(suite), std::move(name), value < threshold, value, threshold,
          std::move(detail)};
}

CheckResult from_report(const std::string& name, const GradCheckReport& report) {
  std::string worst;
  double e = -1.0;
  Index checked = 0, excluded = 0;
  for (const auto& entry : report.entries) {
    checked += entry.checked;
    excluded += entry.excluded;
    if (entry.max_rel_error > e) {
      e = entry.max_rel_error;
      worst = entry.name;
    }
  }
  return below("gradient", name, report.max_rel_error(), kGradTolerance,
               "worst " + worst + ", " + std::to_string(checked) + " checked, " +
                   std::to_string(excluded) + " excluded");
}

CheckResult from_entry(const std::string& name, const GradCheckEntry& entry) {
  GradCheckReport r;
  r.entries.push_back(entry);
  return from_report(name, r);
}

Eigen::VectorXd ar1(double a, Index n, Initializer& rng) {
  Eigen::VectorXd x(n);
  double prev = 0.0;
  for (Index i = 0; i < n; ++i) prev = x[i] = a * prev + 0.1 * rng.normal();
  return x;
}

Eigen::VectorXd as_vector(const Tensor<double>& t) { return t.flat(); }

}  // namespace

std::vector<CheckResult> check_stft_round_trip(const SelfCheckOptions& opts) {
  Initializer rng(hash_combine(opts.seed, 101));
  const StftConfig cfg;
  const Index edge = cfg.window_len / 2;
  double worst = 0.0;
  Index worst_len = 0;
  for (int i = 0; i < 20; ++i) {
    const Index n = static_cast<Index>(rng.uniform(16000.0, 48000.0));
    Eigen::VectorXd x(n);
    for (Index k = 0; k < n; ++k) x[k] = rng.uniform(-1.0, 1.0);
    const Waveform w(x, 16000);
    const Waveform r = istft(stft(w, cfg), cfg, n);
    const double e =
        (r.samples - x).segment(edge, n - 2 * edge).cwiseAbs().maxCoeff();
    if (e >= worst) {
      worst = e;
      worst_len = n;
    }
  }
  return {below("stft", "round_trip_400_100_hamming", worst, kStftTolerance,
                "20 waveforms, worst at " + std::to_string(worst_len) + " samples")};
}

std::vector<CheckResult> check_gradients(const SelfCheckOptions& opts) {
  std::vector<CheckResult> out;
  GradCheckOptions gc;
  gc.step = 1e-5;
  gc.seed = hash_combine(opts.seed, 7);
  gc.inject_fault = opts.inject_fault;
  auto random = [&](Shape shape, std::uint64_t salt) {
    return random_normal(std::move(shape), hash_combine(opts.seed, salt));
  };
  Initializer init(hash_combine(opts.seed, 201));

  {
    Conv2dSpec spec;
    spec.in_channels = 3;
    spec.out_channels = 4;
    spec.kernel_t = 2;
    spec.kernel_f = 3;
    spec.stride_f = 2;
    spec.pad_f_lo = spec.pad_f_hi = 1;
    ConvBlock<double> block(spec, init);
    out.push_back(from_report("conv_block", grad_check(block, random({2, 4, 9, 3}, 1), gc)));
  }
  {
    InstanceNorm<double> norm(3);
    init.fill_uniform(norm.gamma().value, 1.0);
    init.fill_uniform(norm.beta().value, 1.0);
    out.push_back(from_report("instance_norm", grad_check(norm, random({2, 4, 5, 3}, 2), gc)));
  }
  {
    PRelu<double> act(3, PReluAxis::kChannel);
    init.fill_uniform(act.slopes().value, 0.5);
    out.push_back(from_report("prelu", grad_check(act, random({2, 3, 4, 3}, 3), gc)));
  }
  {
    DilatedDenseBlock<double> block(3, init);
    GradCheckOptions o = gc;
    o.max_entries = 24;
    out.push_back(from_report("dilated_dense_block", grad_check(block, random({1, 6, 5, 3}, 4), o)));
  }
  {
    ConformerConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.ff_mult = 2;
    cfg.conv_kernel = 3;
    ConformerBlock<double> block(cfg, init);
    GradCheckOptions o = gc;
    o.max_entries = 40;
    out.push_back(from_report("conformer_block", grad_check(block, random({2, 5, 8}, 5), o)));
  }
  {
    SubPixelConv<double> sp(3, 2, 2, init);
    out.push_back(from_report("subpixel_conv", grad_check(sp, random({1, 2, 5, 3}, 6), gc)));
  }
  {
    DiscriminatorConfig cfg;
    cfg.freq_bins = 33;
    Discriminator<double> d(cfg, hash_combine(opts.seed, 202));
    GradCheckOptions o = gc;
    o.max_entries = 12;
    out.push_back(from_report(
        "discriminator", check_discriminator(d, random({2, 32, 33}, 7), random({2, 32, 33}, 8), o)));
  }
  {
    const auto ri = random({2, 3, 5, 2}, 9), mag = random({2, 3, 5}, 10);
    const auto est_ri = random({2, 3, 5, 2}, 11), est_mag = random({2, 3, 5}, 12);
    const auto l = tf_loss(ri, mag, est_ri, est_mag, 0.7);
    GradCheckReport r;
    r.entries.push_back(check_scalar_function(
        "ri", est_ri, l.grad_ri,
        [&](const Tensor<double>& x) { return tf_loss(ri, mag, x, est_mag, 0.7).value; }, gc));
    r.entries.push_back(check_scalar_function(
        "mag", est_mag, l.grad_mag,
        [&](const Tensor<double>& x) { return tf_loss(ri, mag, est_ri, x, 0.7).value; }, gc));
    out.push_back(from_report("tf_loss", r));
  }
  {
    const auto clean = random({64}, 13), est = random({64}, 14);
    const auto l = time_loss({as_vector(clean)}, {as_vector(est)});
    Tensor<double> analytic({64});
    analytic.flat() = l.grad[0];
    out.push_back(from_entry(
        "time_loss", check_scalar_function("estimate", est, analytic,
                                           [&](const Tensor<double>& x) {
                                             return time_loss({as_vector(clean)}, {as_vector(x)})
                                                 .value;
                                           },
                                           gc)));
  }
  {
    Tensor<double> s = random({4, 1}, 15);
    for (Index i = 0; i < s.size(); ++i) s[i] = 1.0 / (1.0 + std::exp(-s[i]));
    const auto l = gen_adv_loss(s, 1.0);
    out.push_back(from_entry(
        "gen_adv_loss",
        check_scalar_function("scores", s, l.grad,
                              [](const Tensor<double>& x) { return gen_adv_loss(x, 1.0).value; },
                              gc)));
  }
  return out;
}

std::vector<CheckResult> check_metric_oracles(const SelfCheckOptions& opts) {
  using Metric = std::function<double(const Waveform&, const Waveform&)>;
  using Oracle = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
  struct Case {
    std::string name;
    Metric metric;
    Oracle oracle;
    double identity;
  };
  const MetricConfig mc;
  const std::vector<Case> cases = {
      {"snr", [](const Waveform& x, const Waveform& y) { return snr(x, y); },
       [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
         return reference::snr(x, y, mc.snr_ceiling);
       },
       mc.snr_ceiling},
      {"ssnr", [](const Waveform& x, const Waveform& y) { return ssnr(x, y); },
       [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
         return reference::ssnr(x, y, 512, 256, mc.ssnr_floor, mc.ssnr_ceil);
       },
       mc.ssnr_ceil},
      {"lsd10", [](const Waveform& x, const Waveform& y) { return lsd(x, y, LogBase::kTen); },
       [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
         return reference::lsd(x, y, mc.lsd_window, mc.lsd_hop, true, mc.lsd_power_floor);
       },
       0.0},
      {"lsd_e", [](const Waveform& x, const Waveform& y) { return lsd(x, y, LogBase::kNatural); },
       [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
         return reference::lsd(x, y, mc.lsd_window, mc.lsd_hop, false, mc.lsd_power_floor);
       },
       0.0},
      {"llr", [](const Waveform& x, const Waveform& y) { return llr(x, y); },
       [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return reference::llr(x, y); },
       0.0},
      {"cd", [](const Waveform& x, const Waveform& y) { return cd(x, y); },
       [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return reference::cd(x, y); },
       0.0},
      {"fwsegsnr", [](const Waveform& x, const Waveform& y) { return fwsegsnr(x, y); },
       [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
         return reference::fwsegsnr(x, y, 16000);
       },
       mc.fw_ceil},
  };

  Initializer rng(hash_combine(opts.seed, 301));
  std::vector<Waveform> clean, test;
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = ar1(rng.uniform(-0.9, 0.9), 16000, rng);
    const double noise = rng.uniform(0.05, 1.0);
    Eigen::VectorXd y = rng.uniform(0.5, 1.5) * x;
    for (Index k = 0; k < y.size(); ++k) y[k] += 0.1 * noise * rng.normal();
    clean.emplace_back(x, 16000);
    test.emplace_back(y, 16000);
  }

  std::vector<CheckResult> out;
  for (const Case& c : cases) {
    double worst = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i)
      worst = std::max(worst, std::abs(c.metric(clean[i], test[i]) -
                                       c.oracle(clean[i].samples, test[i].samples)));
    out.push_back(below("metric", c.name + "_vs_oracle", worst, kOracleTolerance,
                        "10 random 1 s pairs"));
    double gap = 0.0;
    for (const Waveform& x : clean) gap = std::max(gap, std::abs(c.metric(x, x) - c.identity));
    CheckResult id{"metric", c.name + "_identity", gap == 0.0, gap, 0.0,
                   format("expected exactly %g", c.identity)};
    out.push_back(id);
  }
  return out;
}

std::vector<CheckResult> run_selfcheck(const SelfCheckOptions& opts) {
  std::vector<CheckResult> all = check_stft_round_trip(opts);
  for (auto& r : check_gradients(opts)) all.push_back(std::move(r));
  for (auto& r : check_metric_oracles(opts)) all.push_back(std::move(r));
  return all;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.passed; });
}

void print_results(const std::vector<CheckResult>& results, std::ostream& os) {
  for (const auto& r : results) {
    os << (r.passed ? "PASS " : "FAIL ") << r.suite << "/" << r.name << " "
       << format("%.3g (threshold %.3g)", r.value, r.threshold);
    if (!r.detail.empty()) os << " " << r.detail;
    os << "\n";
  }
}

}  // namespace cmgan
