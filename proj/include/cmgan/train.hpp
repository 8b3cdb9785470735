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

// Adversarial training: AdamW, the step-decay schedule, random 2 s slicing,
// the alternating generator/discriminator step and resumable runs.

#ifndef CMGAN_TRAIN_HPP_
#define CMGAN_TRAIN_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmgan/checkpoint.hpp"
#include "cmgan/discriminator.hpp"
#include "cmgan/generator.hpp"
#include "cmgan/losses.hpp"
#include "cmgan/metrics.hpp"

namespace cmgan {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Decoupled weight decay: p <- p (1 - lr wd) - lr m^ / (sqrt(v^) + eps).
template <typename Scalar>
class AdamW {
 public:
  explicit AdamW(const AdamConfig& cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  std::int64_t steps() const { return step_; }

  template <typename Model>
  void step(Model& model, double lr) {
    ++step_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, double(step_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, double(step_));
    model.visit("", [&](const std::string& name, Param<Scalar>& p) {
      Moments& s = moments_[name];
      if (s.m.shape() != p.value.shape()) {
        s.m = Tensor<Scalar>(p.value.shape());
        s.v = Tensor<Scalar>(p.value.shape());
      }
      update(p, s, lr, c1, c2);
    });
  }

  void save(const std::string& prefix, Checkpoint& ck) const;
  void load(const std::string& prefix, const Checkpoint& ck);

 private:
  struct Moments {
    Tensor<Scalar> m;
    Tensor<Scalar> v;
  };

  void update(Param<Scalar>& p, Moments& s, double lr, double c1, double c2) const;

  AdamConfig cfg_;
  std::int64_t step_ = 0;
  std::map<std::string, Moments> moments_;
};

// Scales every gradient so the global L2 norm is at most max_norm; returns
// the norm before scaling.
template <typename Model>
double clip_grad_norm(Model& model, double max_norm) {
  double sq = 0.0;
  model.visit("", [&](const std::string&, auto& p) {
    sq += p.grad.flat().template cast<double>().squaredNorm();
  });
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double k = max_norm / norm;
    model.visit("", [&](const std::string&, auto& p) {
      using S = typename std::decay_t<decltype(p.grad)>::value_type;
      p.grad.flat() *= static_cast<S>(k);
    });
  }
  return norm;
}

struct TrainConfig {
  int epochs = 50;
  Index batch = 4;
  double slice_seconds = 2.0;
  double lr_gen = 5e-4;
  double lr_disc = 1e-3;
  double lr_decay = 0.5;
  int decay_every = 12;
  std::uint64_t seed = 0;
  QualityKind quality = QualityKind::kLlr;
  std::string pesq_provider;
  // Global-norm gradient clipping; 0 disables it.
  double grad_clip = 0.0;
  // Stop after this many steps in total; 0 means run every epoch.
  std::int64_t max_steps = 0;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  LossWeights weights;
  AdamConfig adam;
  StftConfig stft;

  void validate() const;
  Index slice_length() const {
    return static_cast<Index>(std::llround(slice_seconds * kModelRate));
  }
};

// base * decay^floor(epoch / every).
double lr_at(int epoch, double base, const TrainConfig& cfg);

struct Track {
  std::string id;
  Waveform clean;
  Waveform degraded;
};

// Loads and checks every manifest pair (16 kHz, equal lengths).
std::vector<Track> load_tracks(const std::vector<ManifestEntry>& entries);

struct Slice {
  std::size_t track = 0;
  Index offset = 0;
  Eigen::VectorXd clean;
  Eigen::VectorXd degraded;
};

// Shuffled batches of random fixed-length crops for one epoch. Tracks
// shorter than the slice are zero-padded. The last batch may be smaller.
std::vector<std::vector<Slice>> slice_dataset(const std::vector<Track>& tracks,
                                              const TrainConfig& cfg, int epoch);

struct StepReport {
  std::int64_t step = 0;
  int epoch = 0;
  double lr_gen = 0.0;
  double lr_disc = 0.0;
  double tf = 0.0;
  double gan = 0.0;
  double time = 0.0;
  double gen_total = 0.0;
  double disc = 0.0;
  double quality = 0.0;
  double seconds = 0.0;
};

// Test and diagnostic hooks for a single step.
struct StepControl {
  double lr_scale = 1.0;
  bool update_generator = true;
  bool update_discriminator = true;
};

std::string csv_header();
std::string csv_row(const StepReport& r);

class Trainer {
 public:
  Trainer(const TrainConfig& cfg, std::vector<Track> tracks);

  const TrainConfig& config() const { return cfg_; }
  Generator<float>& generator() { return gen_; }
  Discriminator<float>& discriminator() { return disc_; }
  std::int64_t step() const { return step_; }
  int epoch() const { return epoch_; }
  bool finished() const;

  // One alternating update: generator on tf + adversarial + time losses
  // with the discriminator frozen, then the discriminator on the detached
  // estimate. Throws TrainError on a non-finite loss.
  StepReport train_step(const std::vector<Slice>& batch, const StepControl& ctl = {});

  // Trains until finished(); calls on_step after every step.
  void run(const std::function<void(const StepReport&)>& on_step = {});

  Checkpoint checkpoint() const;
  void save(const std::string& path) const;
  // Continues a run saved by save(); the tracks must be the same.
  void resume(const std::string& path);

 private:
  void advance();

  TrainConfig cfg_;
  std::vector<Track> tracks_;
  Generator<float> gen_;
  Discriminator<float> disc_;
  AdamW<float> opt_gen_;
  AdamW<float> opt_disc_;
  PesqProvider pesq_;
  std::int64_t step_ = 0;
  int epoch_ = 0;
  std::size_t position_ = 0;  // batch index within the epoch
  std::vector<std::vector<Slice>> batches_;
};

// Runs cfg over a manifest, writing out_dir/{train_log.csv, checkpoint.bin}
// (a checkpoint after every epoch). Resumes from `resume_from` when set.
void train_from_manifest(const std::string& manifest, const TrainConfig& cfg,
                         const std::string& out_dir,
                         const std::string& resume_from = "");

// Configurations stored in checkpoints as "gen.*" and "disc.*" metadata.
void store_configs(const GeneratorConfig& g, const DiscriminatorConfig& d, Checkpoint& ck);
GeneratorConfig generator_config_from(const Checkpoint& ck);
DiscriminatorConfig discriminator_config_from(const Checkpoint& ck);

// Generator with weights from a training checkpoint.
Generator<float> load_generator(const std::string& path);

}  // namespace cmgan

#endif  // CMGAN_TRAIN_HPP_
