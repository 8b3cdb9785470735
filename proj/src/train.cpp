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

#include "cmgan/train.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace cmgan {

template <typename Scalar>
void AdamW<Scalar>::update(Param<Scalar>& p, Moments& s, double lr, double c1,
                           double c2) const {
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double decay = 1.0 - lr * cfg_.weight_decay;
  for (Index i = 0; i < p.value.size(); ++i) {
    const double g = p.grad[i];
    const double m = b1 * s.m[i] + (1.0 - b1) * g;
    const double v = b2 * s.v[i] + (1.0 - b2) * g * g;
    s.m[i] = static_cast<Scalar>(m);
    s.v[i] = static_cast<Scalar>(v);
    const double step = lr * (m / c1) / (std::sqrt(v / c2) + cfg_.eps);
    p.value[i] = static_cast<Scalar>(decay * p.value[i] - step);
  }
}

template <typename Scalar>
void AdamW<Scalar>::save(const std::string& prefix, Checkpoint& ck) const {
  ck.metadata[prefix + "step"] = std::to_string(step_);
  for (const auto& [name, s] : moments_) {
    ck.put(prefix + "m." + name, s.m);
    ck.put(prefix + "v." + name, s.v);
  }
}

template <typename Scalar>
void AdamW<Scalar>::load(const std::string& prefix, const Checkpoint& ck) {
  step_ = std::stoll(ck.meta(prefix + "step"));
  moments_.clear();
  const std::string m_prefix = prefix + "m.";
  for (const auto& [key, stored] : ck.tensors) {
    if (key.compare(0, m_prefix.size(), m_prefix) != 0) continue;
    const std::string name = key.substr(m_prefix.size());
    moments_[name] = Moments{ck.get<Scalar>(key), ck.get<Scalar>(prefix + "v." + name)};
  }
}

template class AdamW<float>;
template class AdamW<double>;

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (batch < 1) throw std::invalid_argument("batch must be positive");
  if (!(lr_gen > 0.0) || !(lr_disc > 0.0))
    throw std::invalid_argument("learning rates must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0))
    throw std::invalid_argument("lr_decay must lie in (0, 1]");
  if (decay_every < 1) throw std::invalid_argument("decay_every must be positive");
  if (grad_clip < 0.0) throw std::invalid_argument("grad_clip must be non-negative");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be non-negative");
  stft.validate();
  if (slice_length() < stft.hop) throw std::invalid_argument("slice shorter than one hop");
  if (stft.frames(slice_length()) < discriminator.min_frames())
    throw std::invalid_argument("slice too short for the discriminator");
  if (generator.freq_bins != stft.bins() || discriminator.freq_bins != stft.bins())
    throw std::invalid_argument("model frequency bins do not match the STFT");
  generator.validate();
  discriminator.validate();
  weights.validate();
}

double lr_at(int epoch, double base, const TrainConfig& cfg) {
  return base * std::pow(cfg.lr_decay, std::floor(double(epoch) / cfg.decay_every));
}

std::vector<Track> load_tracks(const std::vector<ManifestEntry>& entries) {
  if (entries.empty()) throw TrainError("manifest has no entries");
  std::vector<Track> tracks;
  for (const ManifestEntry& e : entries) {
    Track t{std::filesystem::path(e.degraded_path).filename().string(),
            read_wav(e.clean_path), read_wav(e.degraded_path)};
    if (t.clean.sample_rate != kModelRate || t.degraded.sample_rate != kModelRate)
      throw TrainError(t.id + ": training audio must be 16 kHz");
    if (t.clean.size() != t.degraded.size())
      throw TrainError(t.id + ": clean and degraded lengths differ");
    tracks.push_back(std::move(t));
  }
  return tracks;
}

std::vector<std::vector<Slice>> slice_dataset(const std::vector<Track>& tracks,
                                              const TrainConfig& cfg, int epoch) {
  Initializer rng(hash_combine(cfg.seed, static_cast<std::uint64_t>(epoch)));
  std::vector<std::size_t> order(tracks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform() * double(i))]);

  const Index len = cfg.slice_length();
  std::vector<std::vector<Slice>> batches;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i % static_cast<std::size_t>(cfg.batch) == 0) batches.emplace_back();
    const Track& t = tracks[order[i]];
    Slice s;
    s.track = order[i];
    s.clean = Eigen::VectorXd::Zero(len);
    s.degraded = Eigen::VectorXd::Zero(len);
    const Index n = t.clean.size();
    if (n > len) {
      s.offset = static_cast<Index>(rng.uniform() * double(n - len + 1));
      s.clean = t.clean.samples.segment(s.offset, len);
      s.degraded = t.degraded.samples.segment(s.offset, len);
    } else {
      s.clean.head(n) = t.clean.samples;
      s.degraded.head(n) = t.degraded.samples;
    }
    batches.back().push_back(std::move(s));
  }
  return batches;
}

std::string csv_header() {
  return "step,epoch,lr_gen,lr_disc,tf_loss,gan_loss,time_loss,gen_loss,disc_loss,"
         "quality,seconds";
}

std::string csv_row(const StepReport& r) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%lld,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.3f",
                static_cast<long long>(r.step), r.epoch, r.lr_gen, r.lr_disc, r.tf, r.gan,
                r.time, r.gen_total, r.disc, r.quality, r.seconds);
  return buf;
}

Trainer::Trainer(const TrainConfig& cfg, std::vector<Track> tracks)
    : cfg_(cfg),
      tracks_(std::move(tracks)),
      gen_((cfg.validate(), cfg.generator), hash_combine(cfg.seed, 1)),
      disc_(cfg.discriminator, hash_combine(cfg.seed, 2)),
      opt_gen_(cfg.adam),
      opt_disc_(cfg.adam),
      pesq_(cfg.pesq_provider) {
  if (tracks_.empty()) throw TrainError("no training tracks");
  if (cfg_.quality == QualityKind::kPesq && !pesq_.available())
    throw TrainError("quality kind 'pesq' needs --pesq-provider");
  batches_ = slice_dataset(tracks_, cfg_, epoch_);
}

bool Trainer::finished() const {
  return epoch_ >= cfg_.epochs || (cfg_.max_steps > 0 && step_ >= cfg_.max_steps);
}

namespace {

template <typename Scalar>
Tensor<Scalar> channel(const Tensor<Scalar>& packed, Index c) {
  const Index b = packed.dim(0), t = packed.dim(1), f = packed.dim(2);
  Tensor<Scalar> out({b, t, f});
  out.flat() = packed.matrix().col(c);
  return out;
}

template <typename Scalar>
Tensor<Scalar> complex_part(const Tensor<Scalar>& packed) {
  Tensor<Scalar> out({packed.dim(0), packed.dim(1), packed.dim(2), 2});
  out.matrix() = packed.matrix().rightCols(2);
  return out;
}

template <typename Scalar>
Tensor<Scalar> stack_batch(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  Shape s = a.shape();
  s[0] += b.dim(0);
  Tensor<Scalar> out(s);
  std::copy(a.data(), a.data() + a.size(), out.data());
  std::copy(b.data(), b.data() + b.size(), out.data() + a.size());
  return out;
}

bool all_finite(const Tensor<float>& t) { return t.flat().allFinite(); }

}  // namespace

StepReport Trainer::train_step(const std::vector<Slice>& batch, const StepControl& ctl) {
  const auto start = std::chrono::steady_clock::now();
  if (batch.empty()) throw TrainError("empty batch");
  const Index len = batch.front().clean.size();
  std::vector<Spectrogram> noisy_specs, clean_specs;
  std::vector<Eigen::VectorXd> clean_wavs;
  for (const Slice& s : batch) {
    if (s.clean.size() != len || s.degraded.size() != len)
      throw TrainError("batch slices differ in length");
    noisy_specs.push_back(compress(stft(Waveform(s.degraded, kModelRate), cfg_.stft)));
    clean_specs.push_back(compress(stft(Waveform(s.clean, kModelRate), cfg_.stft)));
    clean_wavs.push_back(s.clean);
  }
  const Tensor<float> noisy = pack_input<float>(noisy_specs);
  const Tensor<float> clean = pack_input<float>(clean_specs);
  const Tensor<float> clean_mag = channel(clean, 0), clean_ri = complex_part(clean);

  StepReport r;
  r.step = step_ + 1;
  r.epoch = epoch_;
  r.lr_gen = ctl.lr_scale * lr_at(epoch_, cfg_.lr_gen, cfg_);
  r.lr_disc = ctl.lr_scale * lr_at(epoch_, cfg_.lr_disc, cfg_);
  const LossWeights& w = cfg_.weights;
  const double target = clean_target(cfg_.quality);

  auto diagnose = [&](const std::string& what) {
    std::ostringstream os;
    os << "non-finite " << what << " at step " << r.step << " (epoch " << epoch_
       << "), batch tracks:";
    for (const Slice& s : batch) os << ' ' << tracks_[s.track].id << '@' << s.offset;
    return TrainError(os.str());
  };

  // Generator update with the discriminator frozen.
  gen_.set_mode(RunMode{true, hash_combine(cfg_.seed, static_cast<std::uint64_t>(r.step))});
  zero_grad(gen_);
  const GeneratorOutput<float> out = gen_.forward(noisy);
  if (!all_finite(out.ri)) throw diagnose("generator output");
  const TfLoss<float> tf = tf_loss(clean_ri, clean_mag, out.ri, out.mag, w.alpha);
  const std::vector<Waveform> est = synthesize(out.ri, cfg_.stft, len);
  std::vector<Eigen::VectorXd> est_wavs;
  for (const Waveform& e : est) est_wavs.push_back(e.samples);
  const TimeLoss tl = time_loss(clean_wavs, est_wavs);
  const Tensor<float> scores = disc_.forward(clean_mag, out.mag);
  const ScoreLoss<float> adv = gen_adv_loss(scores, target);
  const Tensor<float> d_mag_adv = disc_.backward(adv.grad).second;
  r.tf = tf.value;
  r.gan = adv.value;
  r.time = tl.value;
  r.gen_total = total_gen_loss({r.tf, r.gan, r.time}, w);
  if (!std::isfinite(r.gen_total)) throw diagnose("generator loss");

  Tensor<float> grad_ri = synthesize_backward(out.ri, tl.grad, cfg_.stft);
  grad_ri.flat() *= static_cast<float>(w.gamma_time);
  grad_ri.flat() += static_cast<float>(w.gamma_tf) * tf.grad_ri.flat();
  Tensor<float> grad_mag = tf.grad_mag;
  grad_mag.flat() *= static_cast<float>(w.gamma_tf);
  grad_mag.flat() += static_cast<float>(w.gamma_gan) * d_mag_adv.flat();
  gen_.backward(grad_ri, grad_mag);
  if (cfg_.grad_clip > 0.0) clip_grad_norm(gen_, cfg_.grad_clip);
  if (ctl.update_generator) opt_gen_.step(gen_, r.lr_gen);

  // Discriminator update on the detached estimate.
  std::vector<double> quality;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const QualityScore q =
        quality_for_disc(Waveform(clean_wavs[b], kModelRate), est[b], cfg_.quality, &pesq_);
    quality.push_back(q.value);
    r.quality += q.value / double(batch.size());
  }
  zero_grad(disc_);
  const Index bsz = static_cast<Index>(batch.size());
  const Tensor<float> both = disc_.forward(stack_batch(clean_mag, clean_mag),
                                           stack_batch(clean_mag, out.mag));
  Tensor<float> s_clean({bsz, 1}), s_enh({bsz, 1});
  s_clean.flat() = both.flat().head(bsz);
  s_enh.flat() = both.flat().tail(bsz);
  const DiscLoss<float> dl = disc_loss(s_clean, s_enh, quality, target);
  r.disc = dl.value;
  if (!std::isfinite(r.disc)) throw diagnose("discriminator loss");
  disc_.backward(stack_batch(dl.grad_clean, dl.grad_enhanced));
  if (cfg_.grad_clip > 0.0) clip_grad_norm(disc_, cfg_.grad_clip);
  if (ctl.update_discriminator) opt_disc_.step(disc_, r.lr_disc);
  zero_grad(disc_);

  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void Trainer::advance() {
  ++step_;
  if (++position_ >= batches_.size()) {
    position_ = 0;
    ++epoch_;
    batches_ = slice_dataset(tracks_, cfg_, epoch_);
  }
}

void Trainer::run(const std::function<void(const StepReport&)>& on_step) {
  while (!finished()) {
    const StepReport r = train_step(batches_[position_]);
    advance();
    if (on_step) on_step(r);
  }
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

Index meta_index(const Checkpoint& ck, const std::string& key) {
  return static_cast<Index>(std::stoll(ck.meta(key)));
}

}  // namespace

void store_configs(const GeneratorConfig& g, const DiscriminatorConfig& d, Checkpoint& ck) {
  auto& m = ck.metadata;
  m["gen.channels"] = std::to_string(g.channels);
  m["gen.blocks"] = std::to_string(g.blocks);
  m["gen.freq_bins"] = std::to_string(g.freq_bins);
  m["gen.subpixel_channels"] = std::to_string(g.subpixel_channels);
  m["gen.mask_mode"] = to_string(g.mask_mode);
  m["gen.heads"] = std::to_string(g.heads);
  m["gen.ff_mult"] = std::to_string(g.ff_mult);
  m["gen.conv_kernel"] = std::to_string(g.conv_kernel);
  m["gen.dropout"] = fmt(g.dropout);
  m["disc.channels"] = join(d.channels);
  m["disc.hidden"] = std::to_string(d.hidden);
  m["disc.freq_bins"] = std::to_string(d.freq_bins);
}

GeneratorConfig generator_config_from(const Checkpoint& ck) {
  GeneratorConfig g;
  g.channels = meta_index(ck, "gen.channels");
  g.blocks = meta_index(ck, "gen.blocks");
  g.freq_bins = meta_index(ck, "gen.freq_bins");
  g.subpixel_channels = meta_index(ck, "gen.subpixel_channels");
  g.mask_mode = parse_mask_mode(ck.meta("gen.mask_mode"));
  g.heads = meta_index(ck, "gen.heads");
  g.ff_mult = meta_index(ck, "gen.ff_mult");
  g.conv_kernel = meta_index(ck, "gen.conv_kernel");
  g.dropout = std::stod(ck.meta("gen.dropout"));
  g.validate();
  return g;
}

DiscriminatorConfig discriminator_config_from(const Checkpoint& ck) {
  DiscriminatorConfig d;
  d.channels.clear();
  std::stringstream ss(ck.meta("disc.channels"));
  for (std::string part; std::getline(ss, part, ',');)
    d.channels.push_back(static_cast<Index>(std::stoll(part)));
  d.hidden = meta_index(ck, "disc.hidden");
  d.freq_bins = meta_index(ck, "disc.freq_bins");
  d.validate();
  return d;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck;
  store_configs(cfg_.generator, cfg_.discriminator, ck);
  ck.metadata["train.seed"] = std::to_string(cfg_.seed);
  ck.metadata["train.quality"] = to_string(cfg_.quality);
  ck.metadata["train.step"] = std::to_string(step_);
  ck.metadata["train.epoch"] = std::to_string(epoch_);
  ck.metadata["train.position"] = std::to_string(position_);
  auto& self = const_cast<Trainer&>(*this);
  export_params(self.gen_, "generator.", ck);
  export_params(self.disc_, "discriminator.", ck);
  opt_gen_.save("opt_gen.", ck);
  opt_disc_.save("opt_disc.", ck);
  return ck;
}

void Trainer::save(const std::string& path) const { save_checkpoint(checkpoint(), path); }

void Trainer::resume(const std::string& path) {
  const Checkpoint ck = load_checkpoint(path);
  if (!(generator_config_from(ck) == cfg_.generator) ||
      !(discriminator_config_from(ck) == cfg_.discriminator))
    throw CheckpointError(path + ": model configuration differs from the training config");
  if (ck.meta("train.seed") != std::to_string(cfg_.seed))
    throw CheckpointError(path + ": checkpoint was trained with another seed");
  import_params(gen_, "generator.", ck);
  import_params(disc_, "discriminator.", ck);
  opt_gen_.load("opt_gen.", ck);
  opt_disc_.load("opt_disc.", ck);
  step_ = std::stoll(ck.meta("train.step"));
  epoch_ = std::stoi(ck.meta("train.epoch"));
  position_ = std::stoull(ck.meta("train.position"));
  batches_ = slice_dataset(tracks_, cfg_, epoch_);
  if (position_ >= batches_.size()) throw CheckpointError(path + ": batch position out of range");
}

void train_from_manifest(const std::string& manifest, const TrainConfig& cfg,
                         const std::string& out_dir, const std::string& resume_from) {
  namespace fs = std::filesystem;
  Trainer trainer(cfg, load_tracks(load_manifest(manifest, {.check_paths = true})));
  fs::create_directories(out_dir);
  const fs::path log_path = fs::path(out_dir) / "train_log.csv";
  const std::string ck_path = (fs::path(out_dir) / "checkpoint.bin").string();
  std::ofstream log;
  if (!resume_from.empty()) {
    trainer.resume(resume_from);
    log.open(log_path, std::ios::app);
  } else {
    log.open(log_path, std::ios::trunc);
    log << csv_header() << '\n';
  }
  if (!log) throw TrainError("cannot write " + log_path.string());
  int epoch = trainer.epoch();
  trainer.run([&](const StepReport& r) {
    log << csv_row(r) << '\n';
    log.flush();
    if (trainer.epoch() != epoch || trainer.finished()) {
      epoch = trainer.epoch();
      trainer.save(ck_path);
    }
  });
}

Generator<float> load_generator(const std::string& path) {
  const Checkpoint ck = load_checkpoint(path);
  Generator<float> g(generator_config_from(ck));
  import_params(g, "generator.", ck);
  return g;
}

}  // namespace cmgan
