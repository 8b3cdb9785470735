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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cmgan/degrade.hpp"
#include "cmgan/train.hpp"

namespace cmgan {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cmgan_train_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.generator.channels = 4;
  cfg.generator.blocks = 1;
  cfg.batch = 2;
  cfg.slice_seconds = 0.25;
  cfg.seed = 3;
  return cfg;
}

std::vector<Track> noisy_tracks(int count, Index length) {
  std::vector<Track> tracks;
  for (int i = 0; i < count; ++i) {
    const Waveform c = synth_speech(length, 16000, 10 + i);
    tracks.push_back({"t" + std::to_string(i), c,
                      mix_at_snr(c, synth_noise(NoiseKind::kWhite, length, 16000, 20 + i), 0.0)});
  }
  return tracks;
}

template <typename Model>
std::uint64_t param_hash(Model& m) {
  std::uint64_t h = 0;
  m.visit("", [&](const std::string&, Param<float>& p) {
    for (Index i = 0; i < p.value.size(); ++i) {
      std::uint32_t bits;
      std::memcpy(&bits, &p.value[i], 4);
      h = hash_combine(h, bits);
    }
  });
  return h;
}

// ------------------------------------------------------------- schedule

TEST(LrScheduleTest, HalvesEveryTwelveEpochs) {
  const TrainConfig cfg;
  EXPECT_DOUBLE_EQ(lr_at(0, cfg.lr_gen, cfg), 5e-4);
  EXPECT_DOUBLE_EQ(lr_at(11, cfg.lr_gen, cfg), 5e-4);
  EXPECT_DOUBLE_EQ(lr_at(12, cfg.lr_gen, cfg), 2.5e-4);
  for (int e = 0; e <= 50; ++e)
    EXPECT_DOUBLE_EQ(lr_at(e, 1e-3, cfg), 1e-3 * std::pow(0.5, e / 12)) << e;
}

TEST(TrainConfigTest, Validation) {
  EXPECT_NO_THROW(TrainConfig{}.validate());
  TrainConfig bad = tiny_config();
  bad.lr_gen = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = tiny_config();
  bad.slice_seconds = 0.001;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = tiny_config();
  bad.generator.freq_bins = 101;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

// ---------------------------------------------------------------- adamw

struct OneParam {
  Param<double> p{Shape{3}};
  template <typename Fn>
  void visit(const std::string& prefix, Fn&& fn) {
    fn(prefix + "p", p);
  }
};

TEST(AdamWTest, ZeroGradientNoDecayLeavesParameters) {
  OneParam m;
  m.p.value.flat() << 1.0, -2.0, 3.0;
  AdamW<double> opt({0.9, 0.999, 1e-8, 0.0});
  const auto before = m.p.value;
  for (int i = 0; i < 5; ++i) opt.step(m, 1e-2);
  EXPECT_EQ(m.p.value, before);
  EXPECT_EQ(opt.steps(), 5);
}

TEST(AdamWTest, DecoupledDecayShrinksGeometrically) {
  OneParam m;
  m.p.value.flat() << 1.0, -2.0, 3.0;
  AdamW<double> opt({0.9, 0.999, 1e-8, 0.01});
  for (int i = 0; i < 10; ++i) opt.step(m, 0.1);
  EXPECT_NEAR(m.p.value[1], -2.0 * std::pow(1.0 - 0.1 * 0.01, 10), 1e-15);
}

TEST(AdamWTest, ConstantGradientStepApproachesLr) {
  OneParam m;
  AdamW<double> opt({0.9, 0.999, 1e-8, 0.0});
  m.p.grad.flat().setConstant(0.37);
  double last = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double before = m.p.value[0];
    opt.step(m, 1e-3);
    last = before - m.p.value[0];
  }
  EXPECT_NEAR(last, 1e-3, 1e-9);
}

TEST(AdamWTest, StateRoundTripsThroughCheckpoint) {
  OneParam a;
  a.p.grad.flat() << 0.1, -0.2, 0.3;
  AdamW<double> opt;
  opt.step(a, 1e-2);
  Checkpoint ck;
  opt.save("opt.", ck);
  AdamW<double> restored;
  restored.load("opt.", ck);
  OneParam b = a;
  opt.step(a, 1e-2);
  restored.step(b, 1e-2);
  EXPECT_EQ(a.p.value, b.p.value);
}

TEST(ClipGradNormTest, ScalesToMaxNorm) {
  OneParam m;
  m.p.grad.flat() << 3.0, 0.0, 4.0;
  EXPECT_DOUBLE_EQ(clip_grad_norm(m, 1.0), 5.0);
  EXPECT_NEAR(m.p.grad.flat().norm(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(clip_grad_norm(m, 2.0), 1.0);
  EXPECT_NEAR(m.p.grad.flat().norm(), 1.0, 1e-15);
}

// -------------------------------------------------------------- slicing

TEST(SliceDatasetTest, CropsAndPads) {
  TrainConfig cfg = tiny_config();
  cfg.slice_seconds = 2.0;
  std::vector<Track> tracks = noisy_tracks(1, 5 * 16000);
  auto more = noisy_tracks(1, 16000);
  tracks.push_back(more[0]);
  const auto batches = slice_dataset(tracks, cfg, 0);
  ASSERT_EQ(batches.size(), 1u);
  for (const Slice& s : batches[0]) {
    EXPECT_EQ(s.clean.size(), 32000);
    const Track& t = tracks[s.track];
    if (t.clean.size() > 32000) {
      EXPECT_LE(s.offset, 3 * 16000);
      EXPECT_EQ(s.clean, t.clean.samples.segment(s.offset, 32000));
    } else {
      EXPECT_EQ(s.clean.head(16000), t.clean.samples);
      EXPECT_EQ(s.clean.tail(16000).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(SliceDatasetTest, DeterministicPerSeedAndEpoch) {
  const TrainConfig cfg = tiny_config();
  const auto tracks = noisy_tracks(5, 8000);
  auto order = [&](int epoch) {
    std::vector<std::pair<std::size_t, Index>> o;
    for (const auto& b : slice_dataset(tracks, cfg, epoch))
      for (const auto& s : b) o.emplace_back(s.track, s.offset);
    return o;
  };
  EXPECT_EQ(order(0), order(0));
  EXPECT_NE(order(0), order(1));
  const auto batches = slice_dataset(tracks, cfg, 0);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches.back().size(), 1u);
}

// --------------------------------------------------------------- trainer

TEST(TrainerTest, StepReportsFiniteLosses) {
  Trainer tr(tiny_config(), noisy_tracks(2, 4000));
  const auto batch = slice_dataset(noisy_tracks(2, 4000), tiny_config(), 0)[0];
  const StepReport r = tr.train_step(batch);
  EXPECT_TRUE(std::isfinite(r.tf) && std::isfinite(r.gan) && std::isfinite(r.time));
  EXPECT_NEAR(r.gen_total, r.tf + 0.01 * r.gan + r.time, 1e-9);
  EXPECT_GE(r.quality, 0.0);
  EXPECT_LE(r.quality, 1.0);
}

TEST(TrainerTest, ZeroLearningRateRepeatsLosses) {
  const auto tracks = noisy_tracks(2, 4000);
  Trainer tr(tiny_config(), tracks);
  const auto batch = slice_dataset(tracks, tiny_config(), 0)[0];
  const StepControl frozen{0.0};
  const StepReport a = tr.train_step(batch, frozen), b = tr.train_step(batch, frozen);
  EXPECT_EQ(a.tf, b.tf);
  EXPECT_EQ(a.gan, b.gan);
  EXPECT_EQ(a.disc, b.disc);
}

TEST(TrainerTest, UpdatesTouchOnlyTheirOwnModel) {
  const auto tracks = noisy_tracks(2, 4000);
  const auto batch = slice_dataset(tracks, tiny_config(), 0)[0];
  Trainer g_only(tiny_config(), tracks), d_only(tiny_config(), tracks), both(tiny_config(), tracks);
  const auto g0 = param_hash(g_only.generator()), d0 = param_hash(g_only.discriminator());

  g_only.train_step(batch, {1.0, true, false});
  EXPECT_NE(param_hash(g_only.generator()), g0);
  EXPECT_EQ(param_hash(g_only.discriminator()), d0);

  d_only.train_step(batch, {1.0, false, true});
  EXPECT_EQ(param_hash(d_only.generator()), g0);
  EXPECT_NE(param_hash(d_only.discriminator()), d0);

  // The discriminator update that follows never alters the generator.
  both.train_step(batch);
  EXPECT_EQ(param_hash(both.generator()), param_hash(g_only.generator()));
}

TEST(TrainerTest, NonFiniteInputAbortsWithDiagnostic) {
  auto tracks = noisy_tracks(2, 4000);
  tracks[1].degraded.samples[100] = std::numeric_limits<double>::quiet_NaN();
  Trainer tr(tiny_config(), tracks);
  try {
    tr.run();
    FAIL() << "expected TrainError";
  } catch (const TrainError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("step 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("t1@"), std::string::npos) << msg;
  }
}

TEST(TrainerTest, PesqWithoutProviderIsRejected) {
  TrainConfig cfg = tiny_config();
  cfg.quality = QualityKind::kPesq;
  EXPECT_THROW(Trainer(cfg, noisy_tracks(1, 4000)), TrainError);
}

TEST(TrainerTest, RunsAreDeterministic) {
  TrainConfig cfg = tiny_config();
  cfg.max_steps = 3;
  std::vector<std::string> rows[2];
  std::string bytes[2];
  for (int run = 0; run < 2; ++run) {
    Trainer tr(cfg, noisy_tracks(3, 5000));
    tr.run([&](const StepReport& r) {
      StepReport copy = r;
      copy.seconds = 0.0;
      rows[run].push_back(csv_row(copy));
    });
    const fs::path p = scratch("det" + std::to_string(run)) / "ck.bin";
    tr.save(p.string());
    bytes[run] = slurp(p);
  }
  EXPECT_EQ(rows[0], rows[1]);
  EXPECT_EQ(bytes[0], bytes[1]);
}

TEST(TrainerTest, ResumeContinuesTheSameRun) {
  TrainConfig cfg = tiny_config();
  cfg.max_steps = 4;
  const auto tracks = noisy_tracks(3, 5000);
  std::vector<StepReport> straight;
  Trainer a(cfg, tracks);
  a.run([&](const StepReport& r) { straight.push_back(r); });

  TrainConfig first = cfg;
  first.max_steps = 3;
  Trainer b(first, tracks);
  b.run();
  const fs::path p = scratch("resume") / "ck.bin";
  b.save(p.string());
  Trainer c(cfg, tracks);
  c.resume(p.string());
  EXPECT_EQ(c.step(), 3);
  std::vector<StepReport> resumed;
  c.run([&](const StepReport& r) { resumed.push_back(r); });
  ASSERT_EQ(resumed.size(), 1u);
  EXPECT_EQ(resumed[0].step, 4);
  EXPECT_NEAR(resumed[0].tf, straight[3].tf, 1e-6 * straight[3].tf);
  EXPECT_NEAR(resumed[0].disc, straight[3].disc, 1e-6 * std::abs(straight[3].disc));
}

TEST(TrainerTest, ResumeRejectsOtherModels) {
  const auto tracks = noisy_tracks(2, 4000);
  Trainer a(tiny_config(), tracks);
  const fs::path p = scratch("mismatch") / "ck.bin";
  a.save(p.string());
  TrainConfig other = tiny_config();
  other.generator.channels = 8;
  Trainer b(other, tracks);
  EXPECT_THROW(b.resume(p.string()), CheckpointError);
}

// ------------------------------------------------------------ checkpoint

TEST(CheckpointTest, BitExactRoundTrip) {
  Trainer tr(tiny_config(), noisy_tracks(2, 4000));
  tr.train_step(slice_dataset(noisy_tracks(2, 4000), tiny_config(), 0)[0]);
  const Checkpoint ck = tr.checkpoint();
  const fs::path p = scratch("ck") / "a.bin";
  save_checkpoint(ck, p.string());
  const Checkpoint back = load_checkpoint(p.string());
  EXPECT_EQ(back.metadata, ck.metadata);
  ASSERT_EQ(back.tensors.size(), ck.tensors.size());
  for (const auto& [name, t] : ck.tensors) EXPECT_TRUE(back.tensors.at(name) == t) << name;
  save_checkpoint(back, (p.parent_path() / "b.bin").string());
  EXPECT_EQ(slurp(p), slurp(p.parent_path() / "b.bin"));
}

TEST(CheckpointTest, MixedScalarTypes) {
  Checkpoint ck;
  ck.put("f", Tensor<float>({2, 2}, 1.5f));
  ck.put("d", Tensor<double>({3}, 0.1));
  const fs::path p = scratch("mixed") / "m.bin";
  save_checkpoint(ck, p.string());
  const Checkpoint back = load_checkpoint(p.string());
  EXPECT_EQ(back.get<float>("f"), ck.get<float>("f"));
  EXPECT_EQ(back.get<double>("d"), ck.get<double>("d"));
  EXPECT_THROW(back.get<double>("f"), CheckpointError);
  EXPECT_THROW(back.get<float>("missing"), CheckpointError);
}

TEST(CheckpointTest, RefusesOtherVersionsAndFiles) {
  const fs::path dir = scratch("versions");
  Checkpoint ck;
  ck.version = kCheckpointVersion + 1;
  save_checkpoint(ck, (dir / "v.bin").string());
  try {
    load_checkpoint((dir / "v.bin").string());
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  std::ofstream(dir / "junk.bin") << "RIFF....WAVE";
  EXPECT_THROW(load_checkpoint((dir / "junk.bin").string()), CheckpointError);
  Checkpoint good;
  good.put("x", Tensor<float>({100}, 1.0f));
  save_checkpoint(good, (dir / "t.bin").string());
  fs::resize_file(dir / "t.bin", fs::file_size(dir / "t.bin") - 10);
  EXPECT_THROW(load_checkpoint((dir / "t.bin").string()), CheckpointError);
  EXPECT_THROW(load_checkpoint((dir / "none.bin").string()), CheckpointError);
}

TEST(CheckpointTest, ImportChecksShapes) {
  GeneratorConfig small;
  small.channels = 4;
  small.blocks = 1;
  Generator<float> g(small, 1);
  Checkpoint ck;
  export_params(g, "generator.", ck);
  GeneratorConfig wider = small;
  wider.channels = 8;
  Generator<float> h(wider, 1);
  EXPECT_THROW(import_params(h, "generator.", ck), CheckpointError);
  Generator<float> same(small, 2);
  import_params(same, "generator.", ck);
  const auto x = Tensor<float>({1, 3, 201, 3}, 0.1f);
  EXPECT_EQ(same.forward(x).ri, g.forward(x).ri);
}

TEST(CheckpointTest, LoadGeneratorRestoresConfigAndWeights) {
  TrainConfig cfg = tiny_config();
  cfg.generator.mask_mode = MaskMode::kAdd;
  Trainer tr(cfg, noisy_tracks(1, 4000));
  const fs::path p = scratch("load_gen") / "ck.bin";
  tr.save(p.string());
  Generator<float> g = load_generator(p.string());
  EXPECT_EQ(g.config(), cfg.generator);
  const auto x = Tensor<float>({1, 3, 201, 3}, 0.2f);
  EXPECT_EQ(g.forward(x).ri, tr.generator().forward(x).ri);
}

TEST(TrainFromManifestTest, WritesLogAndCheckpoint) {
  const fs::path root = scratch("manifest");
  write_synthetic_corpus((root / "clean").string(), 2, 0.25, 4);
  DegradeSpec spec;
  const std::string manifest =
      build_dataset((root / "clean").string(), spec, (root / "data").string(), 5);
  TrainConfig cfg = tiny_config();
  cfg.epochs = 2;
  train_from_manifest(manifest, cfg, (root / "run").string());
  std::ifstream log(root / "run" / "train_log.csv");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) ++lines;
  EXPECT_EQ(lines, 1 + 2);
  EXPECT_TRUE(fs::exists(root / "run" / "checkpoint.bin"));
  EXPECT_THROW(train_from_manifest((root / "nope.jsonl").string(), cfg, (root / "x").string()),
               ManifestError);
}

}  // namespace
}  // namespace cmgan
