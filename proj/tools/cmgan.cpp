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

// cmgan: degrade, train, enhance, evaluate, selfcheck.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cmgan/audio_io.hpp"
#include "cmgan/degrade.hpp"
#include "cmgan/generator.hpp"
#include "cmgan/metrics.hpp"
#include "cmgan/train.hpp"
#include "selfcheck.hpp"

namespace fs = std::filesystem;

namespace cmgan {
namespace {

struct DegradeArgs {
  std::string clean_dir, out, task = "denoise";
  std::vector<double> snr, t60;
  std::vector<std::string> noise;
  std::vector<int> scale;
  bool reverb_noise = false;
  std::uint64_t seed = 0;
};

struct SynthArgs {
  std::string out;
  int count = 8;
  double seconds = 2.0;
  std::uint64_t seed = 0;
};

struct TrainArgs {
  std::string manifest, out, resume, task, quality = "llr", pesq_provider;
  TrainConfig cfg;
  bool grad_clip = false;
};

struct EnhanceArgs {
  std::string checkpoint, input, manifest, out;
};

struct EvaluateArgs {
  std::string manifest, out, pesq_provider;
  std::vector<std::string> metrics{"snr", "ssnr", "lsd", "llr", "cd", "fwsegsnr"};
};

struct SelfcheckArgs {
  std::uint64_t seed = 0;
  bool inject_fault = false;
};

int run_synth(const SynthArgs& a) {
  for (const auto& p : write_synthetic_corpus(a.out, a.count, a.seconds, a.seed))
    std::cout << p << "\n";
  return 0;
}

int run_degrade(const DegradeArgs& a) {
  DegradeSpec spec;
  spec.task = parse_task(a.task);
  if (!a.snr.empty()) spec.snr_db = a.snr;
  if (!a.noise.empty()) {
    spec.noises.clear();
    for (const auto& n : a.noise) spec.noises.push_back(parse_noise_kind(n));
  }
  if (a.t60.size() == 1) {
    spec.t60_min = spec.t60_max = a.t60[0];
  } else if (a.t60.size() == 2) {
    spec.t60_min = a.t60[0];
    spec.t60_max = a.t60[1];
  } else if (!a.t60.empty()) {
    throw std::invalid_argument("--t60 takes one value or a min,max pair");
  }
  if (!a.scale.empty()) spec.scales = a.scale;
  spec.reverb_noise = a.reverb_noise;
  std::cout << build_dataset(a.clean_dir, spec, a.out, a.seed) << "\n";
  return 0;
}

int run_train(TrainArgs a) {
  a.cfg.quality = parse_quality_kind(a.quality);
  a.cfg.pesq_provider = a.pesq_provider;
  if (a.grad_clip) a.cfg.grad_clip = 5.0;
  const auto entries = load_manifest(a.manifest, {.check_paths = true});
  if (entries.empty()) throw ManifestError("manifest '" + a.manifest + "' has no entries");
  const Task task = a.task.empty() ? entries.front().task : parse_task(a.task);
  a.cfg.generator.mask_mode = mask_mode_for(task);
  train_from_manifest(a.manifest, a.cfg, a.out, a.resume);
  std::cout << (fs::path(a.out) / "checkpoint.bin").string() << "\n";
  return 0;
}

int run_enhance(const EnhanceArgs& a) {
  if (a.input.empty() == a.manifest.empty())
    throw std::invalid_argument("enhance needs exactly one of --input or --manifest");
  Generator<float> g = load_generator(a.checkpoint);
  fs::create_directories(a.out);
  auto process = [&](const std::string& in) {
    const fs::path dst = fs::path(a.out) / fs::path(in).filename();
    write_wav(enhance(g, read_wav(in)), dst.string());
    return fs::absolute(dst).lexically_normal().string();
  };
  if (!a.input.empty()) {
    std::cout << process(a.input) << "\n";
    return 0;
  }
  std::vector<ManifestEntry> entries = load_manifest(a.manifest, {.check_paths = true});
  for (auto& e : entries) {
    e.meta["source_path"] = e.degraded_path;
    e.degraded_path = process(e.degraded_path);
  }
  const std::string out_manifest = (fs::path(a.out) / "manifest.jsonl").string();
  write_manifest(entries, out_manifest);
  std::cout << out_manifest << "\n";
  return 0;
}

double compute_metric(const std::string& name, const Waveform& clean, const Waveform& test,
                      const PesqProvider& pesq) {
  if (name == "snr") return snr(clean, test);
  if (name == "ssnr") return ssnr(clean, test);
  if (name == "lsd") return lsd(clean, test, LogBase::kTen);
  if (name == "lsd_e") return lsd(clean, test, LogBase::kNatural);
  if (name == "llr") return llr(clean, test);
  if (name == "cd") return cd(clean, test);
  if (name == "fwsegsnr") return fwsegsnr(clean, test);
  if (name == "pesq") return pesq.score(clean, test);
  throw std::invalid_argument("unknown metric '" + name + "'");
}

void write_atomically(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + path);
  }
  fs::rename(tmp, path);
}

int run_evaluate(const EvaluateArgs& a) {
  static const std::vector<std::string> known = {"snr", "ssnr", "lsd",      "lsd_e",
                                                 "llr", "cd",   "fwsegsnr", "pesq"};
  for (const auto& m : a.metrics)
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw std::invalid_argument("unknown metric '" + m + "'");
  const PesqProvider pesq(a.pesq_provider);
  const auto entries = load_manifest(a.manifest, {.check_paths = true});
  std::ostringstream csv;
  csv << "track";
  for (const auto& m : a.metrics) csv << "," << m;
  csv << "\n";
  std::vector<double> sums(a.metrics.size(), 0.0);
  char buf[64];
  for (const auto& e : entries) {
    const Waveform clean = read_wav(e.clean_path), test = read_wav(e.degraded_path);
    csv << fs::path(e.degraded_path).filename().string();
    for (std::size_t k = 0; k < a.metrics.size(); ++k) {
      const double v = compute_metric(a.metrics[k], clean, test, pesq);
      sums[k] += v;
      std::snprintf(buf, sizeof(buf), ",%.6f", v);
      csv << buf;
    }
    csv << "\n";
  }
  csv << "mean";
  for (double s : sums) {
    std::snprintf(buf, sizeof(buf), ",%.6f", entries.empty() ? 0.0 : s / double(entries.size()));
    csv << buf;
  }
  csv << "\n";
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_atomically(a.out, csv.str());
    std::cout << a.out << "\n";
  }
  return 0;
}

int run_selfcheck_cmd(const SelfcheckArgs& a) {
  const auto results = run_selfcheck({.seed = a.seed, .inject_fault = a.inject_fault});
  print_results(results, std::cout);
  const bool ok = all_passed(results);
  if (!ok) std::cerr << "selfcheck: failures detected\n";
  return ok ? 0 : 1;
}

}  // namespace
}  // namespace cmgan

int main(int argc, char** argv) {
  using namespace cmgan;
  CLI::App app{"CMGAN speech enhancement"};
  app.fallthrough();
  app.set_config("--config", "",
                 "INI file with one [subcommand] section; command-line flags take precedence");
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic clean speech corpus");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--count", synth.count, "Number of tracks")->check(CLI::PositiveNumber);
  s->add_option("--seconds", synth.seconds, "Track duration")->check(CLI::PositiveNumber);
  s->add_option("--seed", synth.seed, "Random seed");

  DegradeArgs deg;
  auto* d = app.add_subcommand("degrade", "Build a degraded dataset and manifest");
  d->add_option("--clean-dir", deg.clean_dir, "Directory of clean 16 kHz WAV files")->required();
  d->add_option("--out", deg.out, "Output directory")->required();
  d->add_option("--task", deg.task, "denoise, dereverb or superres");
  d->add_option("--snr", deg.snr, "SNR values in dB to draw from")->delimiter(',');
  d->add_option("--noise", deg.noise, "Noise kinds: white, pink, babble, doorbell")
      ->delimiter(',');
  d->add_option("--t60", deg.t60, "Reverberation time, or a min,max range")->delimiter(',');
  d->add_option("--scale", deg.scale, "Downsampling factors to draw from")->delimiter(',');
  d->add_flag("--reverb-noise", deg.reverb_noise, "Add 20 dB stationary noise to reverb");
  d->add_option("--seed", deg.seed, "Random seed");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Adversarial training from a manifest");
  t->add_option("--manifest", tr.manifest, "Training manifest")->required();
  t->add_option("--out", tr.out, "Output directory for checkpoint.bin and train_log.csv")
      ->required();
  t->add_option("--resume", tr.resume, "Checkpoint to resume from");
  t->add_option("--task", tr.task, "Override the manifest task (selects the mask mode)");
  t->add_option("--epochs", tr.cfg.epochs, "Training epochs");
  t->add_option("--batch", tr.cfg.batch, "Batch size");
  t->add_option("--channels", tr.cfg.generator.channels, "Generator channels C");
  t->add_option("--blocks", tr.cfg.generator.blocks, "Two-stage conformer blocks N");
  t->add_option("--slice-seconds", tr.cfg.slice_seconds, "Training slice duration");
  t->add_option("--lr-gen", tr.cfg.lr_gen, "Generator learning rate");
  t->add_option("--lr-disc", tr.cfg.lr_disc, "Discriminator learning rate");
  t->add_option("--lr-decay", tr.cfg.lr_decay, "Learning-rate decay factor");
  t->add_option("--decay-every", tr.cfg.decay_every, "Epochs between decays");
  t->add_option("--max-steps", tr.cfg.max_steps, "Stop after this many steps (0: no limit)");
  t->add_option("--seed", tr.cfg.seed, "Random seed");
  t->add_option("--quality", tr.quality, "Discriminator target metric: pesq or llr");
  t->add_option("--pesq-provider", tr.pesq_provider, "PESQ scorer executable");
  t->add_flag("--grad-clip", tr.grad_clip, "Clip gradients to global norm 5");

  EnhanceArgs en;
  auto* e = app.add_subcommand("enhance", "Enhance a WAV file or every track of a manifest");
  e->add_option("--checkpoint", en.checkpoint, "Trained checkpoint")->required();
  e->add_option("--input", en.input, "Single WAV file");
  e->add_option("--manifest", en.manifest, "Manifest of degraded tracks");
  e->add_option("--out", en.out, "Output directory")->required();

  EvaluateArgs ev;
  auto* v = app.add_subcommand("evaluate", "Per-track metrics over a manifest");
  v->add_option("--manifest", ev.manifest, "Manifest of (clean, test) pairs")->required();
  v->add_option("--metrics", ev.metrics,
                "snr, ssnr, lsd, lsd_e, llr, cd, fwsegsnr, pesq")
      ->delimiter(',');
  v->add_option("--out", ev.out, "CSV report path (default: standard output)");
  v->add_option("--pesq-provider", ev.pesq_provider, "PESQ scorer executable");

  SelfcheckArgs sc;
  auto* c = app.add_subcommand("selfcheck", "Gradient, STFT and metric verification suites");
  c->add_option("--seed", sc.seed, "Random seed");
  c->add_flag("--inject-fault", sc.inject_fault, "Corrupt analytic gradients");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*s) return run_synth(synth);
    if (*d) return run_degrade(deg);
    if (*t) return run_train(tr);
    if (*e) return run_enhance(en);
    if (*v) return run_evaluate(ev);
    if (*c) return run_selfcheck_cmd(sc);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
