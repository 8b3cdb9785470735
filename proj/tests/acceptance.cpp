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

// Acceptance runner: one PASS/FAIL line per criterion, AC-1 to AC-10.
// Usage: acceptance [AC-n ...]   (no arguments runs every criterion)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cmgan/checkpoint.hpp"
#include "cmgan/degrade.hpp"
#include "cmgan/discriminator.hpp"
#include "cmgan/dsp.hpp"
#include "cmgan/generator.hpp"
#include "cmgan/losses.hpp"
#include "cmgan/metrics.hpp"
#include "cmgan/model_checks.hpp"
#include "cmgan/train.hpp"
#include "reference.hpp"
#include "selfcheck.hpp"

namespace cmgan {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

std::string failures(const std::vector<CheckResult>& rs) {
  std::string s;
  for (const auto& r : rs)
    if (!r.passed) s += " " + r.suite + "/" + r.name + "=" + fmt("%.3g", r.value);
  return s;
}

// ---------------------------------------------------------------- AC-1

Outcome ac1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rs = check_stft_round_trip();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {rs[0].passed && secs < 5.0,
          fmt("max error %.3g over 20 waveforms (< 1e-6), %.2f s (< 5 s)", rs[0].value, secs)};
}

// ---------------------------------------------------------------- AC-2

// Symbolic sizes of the architecture table: B, T, T/2^k (floor) or a fixed
// number, resolved for a given batch and frame count.
struct Dim {
  enum Kind { kFixed, kB, kT, kBT, kTimesB } kind;
  Index value = 0;  // fixed size, time divisor, or batch multiplier
  Index resolve(Index b, Index t) const {
    switch (kind) {
      case kFixed: return value;
      case kB: return b;
      case kT: return t / value;
      case kBT: return b * t;
      case kTimesB: return value * b;
    }
    return 0;
  }
};

Dim fixed(Index v) { return {Dim::kFixed, v}; }
const Dim kB{Dim::kB, 1};
Dim tdiv(Index d) { return {Dim::kT, d}; }
const Dim kBT{Dim::kBT, 1};
Dim times_b(Index m) { return {Dim::kTimesB, m}; }

struct TableRow {
  std::string section, layer;
  std::vector<Dim> input, output;  // empty: the table gives no size
};

std::vector<TableRow> generator_table() {
  const Dim t = tdiv(1);
  auto btfc = [&](Index f, Index c) { return std::vector<Dim>{kB, t, fixed(f), fixed(c)}; };
  std::vector<TableRow> rows = {
      {"Encoder", "2D-Conv.", btfc(201, 3), btfc(201, 64)},
      {"Encoder", "Dil. Dense-1", btfc(201, 64), btfc(201, 64)},
      {"Encoder", "Dil. Dense-2", btfc(201, 64), btfc(201, 64)},
      {"Encoder", "Dil. Dense-3", btfc(201, 64), btfc(201, 64)},
      {"Encoder", "Dil. Dense-4", btfc(201, 64), btfc(201, 64)},
      {"Encoder", "2D-Conv.", btfc(201, 64), btfc(101, 64)},
  };
  for (int n = 1; n <= 4; ++n) {
    const std::string sec = "TS-Conf. " + std::to_string(n);
    const std::vector<Dim> time_major{times_b(101), t, fixed(64)};
    const std::vector<Dim> freq_major{kBT, fixed(101), fixed(64)};
    rows.push_back({sec, "Reshape", btfc(101, 64), time_major});
    rows.push_back({sec, "Time-Conf.", time_major, time_major});
    rows.push_back({sec, "Reshape", time_major, freq_major});
    rows.push_back({sec, "Freq.-Conf.", freq_major, freq_major});
    rows.push_back({sec, "Reshape", freq_major, btfc(101, 64)});
  }
  for (const std::string sec : {"Mask Dec.", "Complex Dec."}) {
    for (int k = 1; k <= 4; ++k)
      rows.push_back({sec, "Dil. Dense-" + std::to_string(k), btfc(101, 64), btfc(101, 64)});
    rows.push_back({sec, "Sub-pixel", btfc(101, 64), btfc(202, 256)});
    rows.push_back({sec, "2D-Conv.", btfc(202, 256), btfc(201, sec == "Mask Dec." ? 1 : 2)});
    if (sec == "Mask Dec.") rows.push_back({sec, "PReLU", {}, {}});
  }
  return rows;
}

std::vector<TableRow> discriminator_table() {
  const std::string sec = "Metric Disc.";
  return {
      {sec, "2D-Conv.-1", {kB, tdiv(1), fixed(201), fixed(2)},
       {kB, tdiv(2), fixed(100), fixed(16)}},
      {sec, "2D-Conv.-2", {kB, tdiv(2), fixed(100), fixed(16)},
       {kB, tdiv(4), fixed(50), fixed(32)}},
      {sec, "2D-Conv.-3", {kB, tdiv(4), fixed(50), fixed(32)},
       {kB, tdiv(8), fixed(25), fixed(64)}},
      {sec, "2D-Conv.-4", {kB, tdiv(8), fixed(25), fixed(64)},
       {kB, tdiv(16), fixed(12), fixed(128)}},
      {sec, "Avg. Pooling", {kB, tdiv(16), fixed(12), fixed(128)}, {kB, fixed(128)}},
      {sec, "Linear-1", {kB, fixed(128)}, {kB, fixed(64)}},
      {sec, "Linear-2", {kB, fixed(64)}, {kB, fixed(1)}},
      {sec, "Sigmoid", {}, {}},
  };
}

Shape resolve(const std::vector<Dim>& dims, Index b, Index t) {
  Shape s;
  for (const Dim& d : dims) s.push_back(d.resolve(b, t));
  return s;
}

// Every table row must appear, in order, in the walk with matching sizes;
// the walk may hold additional rows between them.
std::string match_table(const std::vector<TableRow>& table, const std::vector<ShapeRow>& walk,
                        Index b, Index t) {
  std::size_t pos = 0;
  for (const TableRow& row : table) {
    bool found = false;
    while (pos < walk.size() && !found) {
      const ShapeRow& w = walk[pos++];
      if (w.layer != row.layer) continue;
      if (w.section != row.section && w.section.rfind(row.section, 0) != 0) continue;
      if (!row.input.empty() &&
          (w.input != resolve(row.input, b, t) || w.output != resolve(row.output, b, t)))
        return row.section + "/" + row.layer + " sizes differ at T=" + std::to_string(t);
      found = true;
    }
    if (!found) return row.section + "/" + row.layer + " missing at T=" + std::to_string(t);
  }
  return {};
}

Outcome ac2() {
  const auto t0 = std::chrono::steady_clock::now();
  Generator<float> g;
  Discriminator<float> d;
  const Index b = 2;
  std::string err;
  int compared = 0;
  for (Index t : {1, 50, 321}) {
    if (err.empty()) err = match_table(generator_table(), g.shape_walk(b, t), b, t);
    compared += static_cast<int>(generator_table().size());
    // The discriminator's four stride-2 blocks need at least 16 frames.
    if (t >= d.config().min_frames()) {
      if (err.empty()) err = match_table(discriminator_table(), d.shape_walk(b, t), b, t);
      compared += static_cast<int>(discriminator_table().size());
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {err.empty() && secs < 1.0,
          (err.empty() ? std::to_string(compared) + " table rows matched at T in {1,50,321}"
                       : err) +
              fmt(" (discriminator rows at T=50,321 only), %.3f s (< 1 s)", secs)};
}

// ---------------------------------------------------------------- AC-3

Outcome ac3() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rs = check_gradients();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double worst = 0.0;
  for (const auto& r : rs) worst = std::max(worst, r.value);
  return {all_passed(rs) && secs < 120.0,
          fmt("%g units, worst relative error %.3g (< 1e-4), %.1f s (< 120 s)", double(rs.size()),
              worst, secs) +
              failures(rs)};
}

// ---------------------------------------------------------------- AC-4

std::vector<Track> toy_tracks(int count, Index length, std::uint64_t seed) {
  std::vector<Track> tracks;
  for (int i = 0; i < count; ++i) {
    const Waveform c = synth_speech(length, kModelRate, hash_combine(seed, 100 + i));
    const Waveform n =
        synth_noise(NoiseKind::kWhite, length, kModelRate, hash_combine(seed, 200 + i));
    tracks.push_back({"toy" + std::to_string(i), c, mix_at_snr(c, n, 0.0)});
  }
  return tracks;
}

Outcome ac4() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Track> tracks = toy_tracks(8, 2 * kModelRate, 4);
  TrainConfig cfg;
  cfg.generator.channels = 16;
  cfg.generator.blocks = 1;
  cfg.quality = QualityKind::kLlr;
  cfg.slice_seconds = 2.0;
  cfg.batch = 2;
  cfg.lr_decay = 1.0;
  cfg.epochs = 1000;
  cfg.max_steps = 300;
  cfg.seed = 4;
  Trainer trainer(cfg, tracks);
  std::vector<double> tf;
  trainer.run([&](const StepReport& r) { tf.push_back(r.tf); });
  const double at10 = tf.at(9), at300 = tf.at(299);
  double before = 0.0, after = 0.0;
  for (const Track& t : tracks) {
    before += ssnr(t.clean, t.degraded) / double(tracks.size());
    after += ssnr(t.clean, enhance(trainer.generator(), t.degraded)) / double(tracks.size());
  }
  auto window_mean = [&](std::size_t from) {
    double s = 0.0;
    for (std::size_t i = from; i < from + 200; ++i) s += tf[i];
    return s / 200.0;
  };
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool a = at300 < 0.25 * at10, b = after - before >= 3.0;
  return {a && b && secs < 900.0,
          fmt("(a) tf_loss step300/step10 = %.4f/%.4f = %.1f%% (< 25%%); ", at300, at10,
              100.0 * at300 / at10) +
              fmt("(b) SSNR %.2f -> %.2f dB, gain %.2f dB (>= 3); ", before, after,
                  after - before) +
              fmt("200-step window mean %.4f -> %.4f; %.0f s (< 900 s)", window_mean(0),
                  window_mean(100), secs)};
}

// ---------------------------------------------------------------- AC-5

Tensor<float> compressed_magnitude(const std::vector<Waveform>& ws) {
  std::vector<Spectrogram> specs;
  for (const Waveform& w : ws) specs.push_back(compress(stft(w)));
  const Tensor<float> packed = pack_input<float>(specs);
  Tensor<float> mag({packed.dim(0), packed.dim(1), packed.dim(2)});
  for (Index i = 0; i < mag.size(); ++i) mag[i] = packed[3 * i];
  return mag;
}

Tensor<float> stack(const Tensor<float>& a, const Tensor<float>& b) {
  Shape s = a.shape();
  s[0] += b.dim(0);
  Tensor<float> out(s);
  std::copy(a.data(), a.data() + a.size(), out.data());
  std::copy(b.data(), b.data() + b.size(), out.data() + a.size());
  return out;
}

Outcome ac5() {
  const auto t0 = std::chrono::steady_clock::now();
  const Index len = kModelRate / 2;
  std::vector<Waveform> clean, enhanced;
  std::vector<double> q;
  const double snrs[] = {-5.0, 5.0, 15.0, 30.0};
  for (int i = 0; i < 4; ++i) {
    clean.push_back(synth_speech(len, kModelRate, 500 + i));
    enhanced.push_back(
        mix_at_snr(clean.back(), synth_noise(NoiseKind::kPink, len, kModelRate, 600 + i), snrs[i]));
    q.push_back(quality_for_disc(clean.back(), enhanced.back(), QualityKind::kLlr).value);
  }
  const double target = clean_target(QualityKind::kLlr);
  const Tensor<float> ref = compressed_magnitude(clean), test = compressed_magnitude(enhanced);
  const Tensor<float> refs = stack(ref, ref), tests = stack(ref, test);

  TrainConfig defaults;
  Discriminator<float> d({}, 5);
  AdamW<float> opt(defaults.adam);
  for (int step = 0; step < 500; ++step) {
    zero_grad(d);
    const Tensor<float> s = d.forward(refs, tests);
    Tensor<float> s_clean({4, 1}), s_enh({4, 1});
    s_clean.flat() = s.flat().head(4);
    s_enh.flat() = s.flat().tail(4);
    const DiscLoss<float> dl = disc_loss(s_clean, s_enh, q, target);
    d.backward(stack(dl.grad_clean, dl.grad_enhanced));
    opt.step(d, defaults.lr_disc);
  }
  const Tensor<float> s = d.forward(refs, tests);
  double clean_err = 0.0, enh_err = 0.0;
  std::string qs;
  for (Index i = 0; i < 4; ++i) {
    clean_err = std::max(clean_err, std::abs(double(s[i]) - target));
    enh_err = std::max(enh_err, std::abs(double(s[4 + i]) - q[std::size_t(i)]));
    qs += fmt(" %.3f->%.3f", q[std::size_t(i)], s[4 + i]);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {clean_err < 0.05 && enh_err < 0.05 && secs < 300.0,
          fmt("max |D(X,X)-%.0f| = %.4f, max |D(X,Xh)-Q| = %.4f (< 0.05); Q->D:", target,
              clean_err, enh_err) +
              qs + fmt("; %.1f s (< 300 s)", secs)};
}

// ---------------------------------------------------------------- AC-6

Outcome ac6() {
  const auto rs = check_metric_oracles();
  double worst = 0.0;
  for (const auto& r : rs)
    if (r.name.find("_vs_oracle") != std::string::npos) worst = std::max(worst, r.value);
  return {all_passed(rs),
          fmt("6 metrics (LSD in both bases) on 10 pairs, worst oracle gap %.3g (<= 1e-6); "
              "identity fixed points exact",
              worst) +
              failures(rs)};
}

// ---------------------------------------------------------------- AC-7

Outcome ac7() {
  double mult_err = 0.0, add_err = 0.0, consistency = 0.0;
  {
    Recombiner<double> rec(MaskMode::kMultiply);
    const auto packed = random_packed(2, 7, 33, 71);
    const auto mask = random_normal({2, 7, 33}, 72);
    const auto out = rec.forward(mask, Tensor<double>({2, 7, 33, 2}), packed);
    for (Index i = 0; i < mask.size(); ++i)
      mult_err = std::max(mult_err, std::abs(out.mag[i] - std::abs(mask[i]) * packed[3 * i]));
  }
  {
    Recombiner<double> rec(MaskMode::kAdd);
    const auto packed = random_packed(2, 7, 33, 73);
    const auto out =
        rec.forward(Tensor<double>({2, 7, 33}), Tensor<double>({2, 7, 33, 2}), packed);
    for (Index i = 0; i < out.mag.size(); ++i)
      add_err = std::max({add_err, std::abs(out.ri[2 * i] - packed[3 * i + 1]),
                          std::abs(out.ri[2 * i + 1] - packed[3 * i + 2])});
  }
  GeneratorConfig cfg;
  cfg.channels = 8;
  cfg.blocks = 1;
  cfg.heads = 2;
  for (MaskMode mode : {MaskMode::kMultiply, MaskMode::kAdd}) {
    cfg.mask_mode = mode;
    Generator<double> g(cfg, 74);
    for (int batch = 0; batch < 50; ++batch) {
      const GeneratorOutput<double> out =
          g.forward(random_packed(2, 3, 201, hash_combine(75, std::uint64_t(batch))));
      for (Index i = 0; i < out.mag.size(); ++i)
        consistency = std::max(consistency, std::abs(out.mag[i] - std::hypot(out.ri[2 * i],
                                                                             out.ri[2 * i + 1])));
    }
  }
  return {mult_err < 1e-6 && add_err < 1e-6 && consistency < 1e-6,
          fmt("multiply |X|-|m||Y| %.2g, add-mode input reproduction %.2g, "
              "magnitude consistency over 100 fuzz batches %.2g (all < 1e-6)",
              mult_err, add_err, consistency)};
}

// ---------------------------------------------------------------- AC-8

Outcome ac8() {
  double snr_err = 0.0;
  const Waveform clean = synth_speech(3 * kModelRate, kModelRate, 81);
  for (double target : {0.0, 5.0, 10.0, 15.0})
    for (NoiseKind kind : {NoiseKind::kWhite, NoiseKind::kPink, NoiseKind::kBabble,
                           NoiseKind::kDoorbell}) {
      const Waveform noise = synth_noise(kind, clean.size(), kModelRate, 82);
      const Waveform y = mix_at_snr(clean, noise, target);
      const Eigen::VectorXd added = y.samples - clean.samples;
      const double got =
          10.0 * std::log10(clean.samples.squaredNorm() / added.squaredNorm());
      snr_err = std::max(snr_err, std::abs(got - target));
    }
  double min_atten = 1e9;
  const Waveform white = synth_noise(NoiseKind::kWhite, kModelRate, kModelRate, 83);
  for (int s : {2, 4, 8}) {
    const Waveform y = make_lowres(white, s);
    const double cutoff = 8000.0 / s;
    const double in = reference::band_energy(white.samples, kModelRate, cutoff, 8000.0);
    const double out = reference::band_energy(y.samples, kModelRate, cutoff, 8000.0);
    min_atten = std::min(min_atten, 10.0 * std::log10(in / out));
  }
  double t60_err = 0.0;
  for (double t60 : {0.3, 0.5, 0.7})
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const Waveform h = synth_rir(t60, kModelRate, seed);
      t60_err = std::max(t60_err,
                         std::abs(reference::schroeder_t60(h.samples, kModelRate) - t60) / t60);
    }
  return {snr_err < 0.01 && min_atten >= 50.0 && t60_err < 0.10,
          fmt("SNR error %.2g dB (< 0.01); stopband attenuation >= %.1f dB (>= 50); "
              "Schroeder T60 error %.1f%% (< 10%%)",
              snr_err, min_atten, 100.0 * t60_err)};
}

// ---------------------------------------------------------------- AC-9

struct RunArtifacts {
  std::vector<std::vector<double>> rows;
  std::string checkpoint;
};

RunArtifacts toy_run(const fs::path& dir) {
  TrainConfig cfg;
  cfg.generator.channels = 8;
  cfg.generator.blocks = 1;
  cfg.generator.heads = 2;
  cfg.batch = 2;
  cfg.slice_seconds = 0.5;
  cfg.epochs = 2;
  cfg.seed = 9;
  Trainer trainer(cfg, toy_tracks(4, kModelRate * 3 / 4, 9));
  RunArtifacts a;
  std::ofstream log(dir / "train_log.csv");
  log << csv_header() << "\n";
  trainer.run([&](const StepReport& r) {
    log << csv_row(r) << "\n";
    a.rows.push_back({double(r.step), double(r.epoch), r.lr_gen, r.lr_disc, r.tf, r.gan, r.time,
                      r.gen_total, r.disc, r.quality});
  });
  trainer.save((dir / "checkpoint.bin").string());
  std::ifstream f(dir / "checkpoint.bin", std::ios::binary);
  a.checkpoint.assign(std::istreambuf_iterator<char>(f), {});
  return a;
}

Outcome ac9() {
  const fs::path root = fs::temp_directory_path() / "cmgan_acceptance_ac9";
  fs::remove_all(root);
  fs::create_directories(root / "a");
  fs::create_directories(root / "b");
  const RunArtifacts a = toy_run(root / "a"), b = toy_run(root / "b");
  double worst = a.rows.size() == b.rows.size() ? 0.0 : 1.0;
  for (std::size_t i = 0; i < std::min(a.rows.size(), b.rows.size()); ++i)
    for (std::size_t k = 0; k < a.rows[i].size(); ++k) {
      const double x = a.rows[i][k], y = b.rows[i][k];
      worst = std::max(worst, std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300}));
    }
  const bool same_ck = !a.checkpoint.empty() && a.checkpoint == b.checkpoint;
  return {worst <= 1e-6 && same_ck,
          fmt("%g logged steps, worst relative gap %.2g (<= 1e-6, wall time excluded); "
              "checkpoints %g bytes, ",
              double(a.rows.size()), worst, double(a.checkpoint.size())) +
              (same_ck ? "bit-identical" : "DIFFER")};
}

// --------------------------------------------------------------- AC-10

Outcome ac10() {
  const double p_hi = normalize_quality(4.5, QualityKind::kPesq).value;
  const double p_lo = normalize_quality(-0.5, QualityKind::kPesq).value;
  const double l_lo = normalize_quality(0.0, QualityKind::kLlr).value;
  const double l_hi = normalize_quality(2.0, QualityKind::kLlr).value;
  return {p_hi == 1.0 && p_lo == 0.0 && l_lo == 0.0 && l_hi == 1.0,
          fmt("PESQ 4.5->%g, -0.5->%g; LLR 0->%g, 2->%g", p_hi, p_lo, l_lo, l_hi)};
}

}  // namespace
}  // namespace cmgan

int main(int argc, char** argv) {
  using namespace cmgan;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC-1", ac1}, {"AC-2", ac2}, {"AC-3", ac3}, {"AC-4", ac4}, {"AC-5", ac5},
      {"AC-6", ac6}, {"AC-7", ac7}, {"AC-8", ac8}, {"AC-9", ac9}, {"AC-10", ac10}};
  const std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.passed;
    std::printf("%s %s: %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
