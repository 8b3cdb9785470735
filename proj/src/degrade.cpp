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

#include "cmgan/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "cmgan/dsp.hpp"
#include "cmgan/nn/module.hpp"

namespace cmgan {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum Salt : std::uint64_t {
  kSaltSnr = 1,
  kSaltNoiseKind,
  kSaltNoise,
  kSaltT60,
  kSaltRir,
  kSaltScale,
  kSaltReverbNoise,
};

double energy(const Eigen::VectorXd& x) { return x.squaredNorm(); }

Eigen::VectorXd unit_rms(Eigen::VectorXd x) {
  const double rms = std::sqrt(x.squaredNorm() / double(x.size()));
  if (rms > 0.0) x /= rms;
  return x;
}

// RBJ band-pass biquad (constant 0 dB peak gain).
Eigen::VectorXd bandpass(const Eigen::VectorXd& x, double centre, double q, int rate) {
  const double w0 = kTwoPi * centre / rate, alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = alpha / a0, b2 = -alpha / a0;
  const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
  Eigen::VectorXd y(x.size());
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (Index n = 0; n < x.size(); ++n) {
    const double v = b0 * x[n] + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x[n];
    y2 = y1;
    y1 = v;
    y[n] = v;
  }
  return y;
}

Eigen::VectorXd white(Index n, Initializer& rng) {
  Eigen::VectorXd x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.normal();
  return x;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string hex_id(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db) {
  validate(clean);
  validate(noise);
  if (!std::isfinite(snr_db)) throw DegradeError("mix_at_snr: SNR must be finite");
  if (clean.sample_rate != noise.sample_rate)
    throw DegradeError("mix_at_snr: sample rates differ");
  const Index n = clean.size();
  Eigen::VectorXd looped(n);
  for (Index i = 0; i < n; ++i) looped[i] = noise.samples[i % noise.size()];
  const double px = energy(clean.samples), pn = energy(looped);
  if (px == 0.0) throw DegradeError("mix_at_snr: clean signal has zero energy");
  if (pn == 0.0) throw DegradeError("mix_at_snr: noise has zero energy");
  const double g = std::sqrt(px / (pn * std::pow(10.0, snr_db / 10.0)));
  return {clean.samples + g * looped, clean.sample_rate};
}

Waveform convolve_rir(const Waveform& clean, const Waveform& rir) {
  validate(clean);
  validate(rir);
  if (clean.sample_rate != rir.sample_rate)
    throw DegradeError("convolve_rir: sample rates differ");
  const Index n = clean.size(), l = rir.size();
  Index size = 1;
  while (size < n + l - 1) size *= 2;
  RealFft fft(size);
  std::vector<double> a(size, 0.0), b(size, 0.0), out(size);
  std::copy(clean.samples.data(), clean.samples.data() + n, a.begin());
  std::copy(rir.samples.data(), rir.samples.data() + l, b.begin());
  std::vector<std::complex<double>> fa(size / 2 + 1), fb(size / 2 + 1);
  fft.forward(a.data(), fa.data());
  fft.forward(b.data(), fb.data());
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft.inverse(fa.data(), out.data());
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(out.data(), n);
  const double peak_in = clean.samples.cwiseAbs().maxCoeff();
  const double peak_out = y.cwiseAbs().maxCoeff();
  if (peak_out > 0.0) y *= peak_in / peak_out;
  return {y, clean.sample_rate};
}

Eigen::VectorXd rir_envelope(double t60, int sample_rate, Index length) {
  if (!(t60 > 0.0)) throw DegradeError("rir: t60 must be positive");
  Eigen::VectorXd env(length);
  const double per_sample = -3.0 / (t60 * sample_rate);
  for (Index i = 0; i < length; ++i) env[i] = std::pow(10.0, per_sample * double(i));
  return env;
}

Waveform synth_rir(double t60, int sample_rate, std::uint64_t seed) {
  if (sample_rate <= 0) throw DegradeError("rir: sample rate must be positive");
  const Index length = static_cast<Index>(std::ceil(1.2 * t60 * sample_rate)) + 1;
  Eigen::VectorXd h = rir_envelope(t60, sample_rate, length);
  Initializer rng(seed);
  h[0] = 1.0;
  for (Index i = 1; i < length; ++i) h[i] *= rng.uniform(-0.5, 0.5);
  return {h, sample_rate};
}

Waveform make_lowres(const Waveform& clean, int scale) {
  validate(clean);
  if (scale < 2 || clean.sample_rate % scale)
    throw DegradeError("make_lowres: scale must be >= 2 and divide the sample rate");
  const Index n = clean.size();
  const Index padded = (n + scale - 1) / scale * scale;
  Waveform x(Eigen::VectorXd::Zero(padded), clean.sample_rate);
  x.samples.head(n) = clean.samples;
  const Waveform low = resample(x, clean.sample_rate / scale);
  const Waveform up = resample(low, clean.sample_rate);
  return {up.samples.head(n), clean.sample_rate};
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kPink: return "pink";
    case NoiseKind::kBabble: return "babble";
    case NoiseKind::kDoorbell: return "doorbell";
  }
  return "white";
}

NoiseKind parse_noise_kind(const std::string& name) {
  for (NoiseKind k : {NoiseKind::kWhite, NoiseKind::kPink, NoiseKind::kBabble,
                      NoiseKind::kDoorbell})
    if (to_string(k) == name) return k;
  throw DegradeError("unknown noise kind '" + name + "'");
}

Waveform synth_noise(NoiseKind kind, Index length, int sample_rate,
                     std::uint64_t seed) {
  if (length <= 0 || sample_rate <= 0) throw DegradeError("synth_noise: bad size");
  Initializer rng(seed);
  Eigen::VectorXd x;
  switch (kind) {
    case NoiseKind::kWhite:
      x = white(length, rng);
      break;
    case NoiseKind::kPink: {
      // Paul Kellet's economy filter, -3 dB/octave.
      const Eigen::VectorXd w = white(length, rng);
      x.resize(length);
      double b0 = 0, b1 = 0, b2 = 0;
      for (Index i = 0; i < length; ++i) {
        b0 = 0.99765 * b0 + w[i] * 0.0990460;
        b1 = 0.96300 * b1 + w[i] * 0.2965164;
        b2 = 0.57000 * b2 + w[i] * 1.0526913;
        x[i] = b0 + b1 + b2 + w[i] * 0.1848;
      }
      break;
    }
    case NoiseKind::kBabble: {
      x = Eigen::VectorXd::Zero(length);
      for (int talker = 0; talker < 6; ++talker) {
        const double centre = rng.uniform(300.0, 3000.0);
        const double rate = rng.uniform(3.0, 6.0), phase = rng.uniform(0.0, kTwoPi);
        const Eigen::VectorXd band = bandpass(white(length, rng), centre, 2.0, sample_rate);
        for (Index i = 0; i < length; ++i)
          x[i] += band[i] * (0.6 + 0.4 * std::sin(kTwoPi * rate * i / sample_rate + phase));
      }
      break;
    }
    case NoiseKind::kDoorbell: {
      x = Eigen::VectorXd::Zero(length);
      const double f1 = rng.uniform(2000.0, 3500.0), f2 = f1 * 1.26;
      const Index period = sample_rate, ring = static_cast<Index>(0.4 * sample_rate);
      // First chime starts inside the track, at least a quarter ring before its end.
      const Index span = std::max<Index>(1, std::min(period, length - ring / 4));
      const Index start = static_cast<Index>(rng.uniform(0.0, double(span)));
      for (Index i = 0; i < length; ++i) {
        const Index t = ((i - start) % period + period) % period;
        if (t >= ring) continue;
        const double s = double(t) / sample_rate;
        const double tone = t < ring / 2 ? f1 : f2;
        x[i] = std::exp(-8.0 * s) * std::sin(kTwoPi * tone * s);
      }
      break;
    }
  }
  return {unit_rms(std::move(x)), sample_rate};
}

Waveform synth_speech(Index length, int sample_rate, std::uint64_t seed) {
  if (length <= 0 || sample_rate <= 0) throw DegradeError("synth_speech: bad size");
  Initializer rng(seed);
  const double f0_base = rng.uniform(100.0, 200.0);
  const double drift = rng.uniform(0.5, 1.5), drift_phase = rng.uniform(0.0, kTwoPi);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(length);

  // Syllables: voiced segments separated by short pauses.
  Index start = static_cast<Index>(rng.uniform(0.02, 0.1) * sample_rate);
  std::vector<double> phases(64, 0.0);
  while (start < length) {
    const Index dur = static_cast<Index>(rng.uniform(0.15, 0.35) * sample_rate);
    const Index gap = static_cast<Index>(rng.uniform(0.05, 0.15) * sample_rate);
    const double formants[3] = {rng.uniform(300.0, 850.0), rng.uniform(900.0, 2300.0),
                                rng.uniform(2400.0, 3200.0)};
    const double gain = rng.uniform(0.5, 1.0);
    for (Index i = start; i < std::min(length, start + dur); ++i) {
      const double u = double(i - start) / double(dur);
      const double env = gain * std::sin(std::numbers::pi * u);
      const double t = double(i) / sample_rate;
      const double f0 = f0_base * (1.0 + 0.15 * std::sin(kTwoPi * drift * t + drift_phase));
      double v = 0.0;
      for (std::size_t k = 1; k < phases.size(); ++k) {
        const double fk = double(k) * f0;
        if (fk >= 0.45 * sample_rate) break;
        phases[k] += kTwoPi * fk / sample_rate;
        double w = 0.02;
        for (double fm : formants) w += std::exp(-std::pow((fk - fm) / 150.0, 2));
        v += w * std::sin(phases[k]) / std::sqrt(double(k));
      }
      x[i] = env * v;
    }
    start += dur + gap;
  }
  const double peak = x.cwiseAbs().maxCoeff();
  if (peak > 0.0) x *= 0.5 / peak;
  return {x, sample_rate};
}

void DegradeSpec::validate() const {
  switch (task) {
    case Task::kDenoise:
      if (snr_db.empty()) throw DegradeError("denoise spec needs at least one SNR");
      if (noises.empty()) throw DegradeError("denoise spec needs at least one noise kind");
      for (double s : snr_db)
        if (!std::isfinite(s)) throw DegradeError("SNR values must be finite");
      break;
    case Task::kDereverb:
      if (!(t60_min > 0.0 && t60_max >= t60_min))
        throw DegradeError("dereverb spec needs 0 < t60_min <= t60_max");
      break;
    case Task::kSuperres:
      if (scales.empty()) throw DegradeError("superres spec needs at least one scale");
      for (int s : scales)
        if (s < 2) throw DegradeError("scales must be integers >= 2");
      break;
  }
}

std::size_t draw_index(std::uint64_t seed, std::uint64_t item, std::uint64_t salt,
                       std::size_t n) {
  if (n == 0) throw DegradeError("draw_index: empty choice");
  const std::uint64_t h = hash_combine(hash_combine(seed, item), salt);
  // Multiply-shift keeps the draw unbiased to within 2^-64 for any n.
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(h) * n) >> 64);
}

double draw_uniform(std::uint64_t seed, std::uint64_t item, std::uint64_t salt) {
  const std::uint64_t h = hash_combine(hash_combine(seed, item), salt);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::string build_dataset(const std::string& clean_dir, const DegradeSpec& spec,
                          const std::string& out_dir, std::uint64_t seed) {
  spec.validate();
  if (!fs::is_directory(clean_dir))
    throw DegradeError("clean directory '" + clean_dir + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(clean_dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DegradeError("no .wav files in '" + clean_dir + "'");

  const fs::path out(out_dir), degraded = out / "degraded";
  fs::create_directories(degraded);
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const Waveform clean = read_wav(files[i].string());
    ManifestEntry entry;
    entry.clean_path = fs::absolute(files[i]).lexically_normal().string();
    entry.degraded_path = (fs::path("degraded") / files[i].filename()).string();
    entry.task = spec.task;
    Waveform y;
    switch (spec.task) {
      case Task::kDenoise: {
        const double snr = spec.snr_db[draw_index(seed, i, kSaltSnr, spec.snr_db.size())];
        const NoiseKind kind =
            spec.noises[draw_index(seed, i, kSaltNoiseKind, spec.noises.size())];
        const Waveform n = synth_noise(kind, clean.size(), clean.sample_rate,
                                       hash_combine(seed, hash_combine(i, kSaltNoise)));
        y = mix_at_snr(clean, n, snr);
        entry.meta["snr_db"] = format_number(snr);
        entry.meta["noise"] = to_string(kind);
        break;
      }
      case Task::kDereverb: {
        const double t60 = spec.t60_min + (spec.t60_max - spec.t60_min) *
                                              draw_uniform(seed, i, kSaltT60);
        const std::uint64_t rir_seed = hash_combine(seed, hash_combine(i, kSaltRir));
        y = convolve_rir(clean, synth_rir(t60, clean.sample_rate, rir_seed));
        entry.meta["t60"] = format_number(t60);
        entry.meta["rir_id"] = hex_id(rir_seed);
        if (spec.reverb_noise) {
          const Waveform n =
              synth_noise(NoiseKind::kPink, clean.size(), clean.sample_rate,
                          hash_combine(seed, hash_combine(i, kSaltReverbNoise)));
          y = mix_at_snr(y, n, spec.reverb_noise_snr_db);
          entry.meta["noise_snr_db"] = format_number(spec.reverb_noise_snr_db);
        }
        break;
      }
      case Task::kSuperres: {
        const int s = spec.scales[draw_index(seed, i, kSaltScale, spec.scales.size())];
        y = make_lowres(clean, s);
        entry.meta["scale"] = std::to_string(s);
        break;
      }
    }
    write_wav(y, (out / entry.degraded_path).string());
    entries.push_back(std::move(entry));
  }
  const std::string manifest = (out / "manifest.jsonl").string();
  write_manifest(entries, manifest);
  return manifest;
}

std::vector<std::string> write_synthetic_corpus(const std::string& dir, int count,
                                                double seconds, std::uint64_t seed) {
  if (count <= 0 || !(seconds > 0.0)) throw DegradeError("synthetic corpus: bad size");
  fs::create_directories(dir);
  std::vector<std::string> paths;
  const Index length = static_cast<Index>(std::lround(seconds * 16000));
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "speech_%03d.wav", i);
    const std::string path = (fs::path(dir) / name).string();
    write_wav(synth_speech(length, 16000, hash_combine(seed, std::uint64_t(i))), path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace cmgan
