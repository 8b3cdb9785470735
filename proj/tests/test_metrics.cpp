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
#include <filesystem>
#include <fstream>
#include <random>

#include "cmgan/metrics.hpp"
#include "reference.hpp"

namespace cmgan {
namespace {

Waveform noise(Index n, unsigned seed, double scale = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::VectorXd x(n);
  for (Index i = 0; i < n; ++i) x[i] = dist(rng);
  return {x, 16000};
}

// x[n] = phi * x[n-1] + e[n].
Waveform ar1(double phi, Index n, unsigned seed) {
  Waveform e = noise(n, seed, 0.1);
  for (Index i = 1; i < n; ++i) e.samples[i] += phi * e.samples[i - 1];
  return e;
}

Waveform plus(const Waveform& a, const Waveform& b, double g = 1.0) {
  return {a.samples + g * b.samples, a.sample_rate};
}

TEST(SnrTest, Examples) {
  const Waveform x(Eigen::VectorXd::Ones(4), 16000);
  EXPECT_DOUBLE_EQ(snr(x, x), 100.0);
  const Waveform y(Eigen::VectorXd::Constant(4, 0.9), 16000);
  EXPECT_NEAR(snr(x, y), 20.0, 1e-9);
  EXPECT_NEAR(snr(x, Waveform(Eigen::VectorXd::Zero(4), 16000)), 0.0, 1e-12);
  EXPECT_THROW(snr(x, Waveform(Eigen::VectorXd::Ones(5), 16000)), MetricError);
}

TEST(SsnrTest, IdentityHitsCeiling) {
  const Waveform x = noise(16000, 1);
  EXPECT_DOUBLE_EQ(ssnr(x, x), 35.0);
}

TEST(SsnrTest, NegatedSignalIsMinusSixDb) {
  // Error 2x gives a per-frame ratio of 1/4; the -10 dB floor does not bind.
  const Waveform x = noise(16000, 2);
  Waveform y = x;
  y.samples = -x.samples;
  EXPECT_NEAR(ssnr(x, y), -10.0 * std::log10(4.0), 1e-9);
  EXPECT_NEAR(ssnr(x, y), reference::ssnr(x.samples, y.samples, 512, 256, -10, 35), 1e-9);
}

TEST(SsnrTest, SilentFramesExcluded) {
  Waveform x = noise(16000, 3);
  x.samples.head(8192).setZero();
  const Waveform y = plus(x, noise(16000, 4, 0.01));
  // Frames starting at 0..7680 are silent; the rest start at 7936 + 256 k.
  Waveform xt{x.samples.tail(8064), 16000}, yt{y.samples.tail(8064), 16000};
  EXPECT_NEAR(ssnr(x, y), ssnr(xt, yt), 1e-9);
}

TEST(LsdTest, IdentityIsZero) {
  const Waveform x = noise(8000, 5);
  EXPECT_EQ(lsd(x, x, LogBase::kTen), 0.0);
}

TEST(LsdTest, TenfoldPowerIsOneDecade) {
  const Waveform x = noise(8000, 6);
  Waveform y = x;
  y.samples *= std::sqrt(10.0);
  EXPECT_NEAR(lsd(x, y, LogBase::kTen), 1.0, 1e-9);
}

TEST(LsdTest, ChangeOfBase) {
  const Waveform x = noise(8000, 7), y = plus(x, noise(8000, 8, 0.1));
  EXPECT_NEAR(lsd(x, y, LogBase::kNatural), std::log(10.0) * lsd(x, y, LogBase::kTen), 1e-9);
}

TEST(LpcTest, RecoversAr1Coefficient) {
  const Waveform x = ar1(0.9, 20000, 9);
  const Eigen::VectorXd a = lpc(x.samples, 1);
  EXPECT_DOUBLE_EQ(a[0], 1.0);
  EXPECT_NEAR(a[1], -0.9, 0.02);
}

TEST(LpcTest, ZeroFrameRejected) {
  EXPECT_THROW(lpc(Eigen::VectorXd::Zero(100), 4), MetricError);
}

TEST(LpcTest, OrderZero) {
  const Eigen::VectorXd a = lpc(noise(100, 10).samples, 0);
  ASSERT_EQ(a.size(), 1);
  EXPECT_EQ(a[0], 1.0);
}

TEST(LpcTest, MatchesDenseSolve) {
  const Eigen::VectorXd f = ar1(0.7, 480, 11).samples;
  EXPECT_LT((lpc(f, 16) - reference::lpc(f, 16)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(LpcTest, CepstrumMatchesLogSpectrum) {
  const Eigen::VectorXd a = lpc(ar1(0.8, 480, 12).samples, 16);
  EXPECT_LT((lpc_cepstrum(a, 16) - reference::lpc_cepstrum(a, 16)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(LlrTest, IdentityIsZero) {
  const Waveform x = ar1(0.8, 16000, 13);
  EXPECT_EQ(llr(x, x), 0.0);
}

TEST(LlrTest, FramesNonNegative) {
  const Waveform x = ar1(0.8, 16000, 14), y = noise(16000, 15);
  const Eigen::VectorXd v = llr_frames(x, y);
  EXPECT_GE(v.minCoeff(), 0.0);
  EXPECT_LE(v.maxCoeff(), 2.0);
}

TEST(LlrTest, MatchesDenseOracle) {
  const Waveform x = ar1(0.8, 16000, 16), y = ar1(-0.5, 16000, 17);
  EXPECT_NEAR(llr(x, y), reference::llr(x.samples, y.samples), 1e-8);
}

TEST(CdTest, IdentityIsZero) {
  const Waveform x = ar1(0.8, 16000, 18);
  EXPECT_EQ(cd(x, x), 0.0);
}

TEST(CdTest, ClippedAtTen) {
  const Waveform x = ar1(0.99, 16000, 19), y = ar1(-0.99, 16000, 20);
  const Eigen::VectorXd v = cd_frames(x, y);
  EXPECT_LE(v.maxCoeff(), 10.0);
}

TEST(CdTest, MatchesCepstrumOracle) {
  const Waveform x = ar1(0.8, 16000, 21), y = plus(x, noise(16000, 22, 0.05));
  EXPECT_NEAR(cd(x, y), reference::cd(x.samples, y.samples), 1e-8);
}

TEST(FwSegSnrTest, IdentityHitsCeiling) {
  const Waveform x = noise(8000, 23);
  EXPECT_DOUBLE_EQ(fwsegsnr(x, x), 35.0);
}

TEST(FwSegSnrTest, MatchesBandOracle) {
  const Waveform x = ar1(0.6, 8000, 24), y = plus(x, noise(8000, 25, 0.1));
  EXPECT_NEAR(fwsegsnr(x, y), reference::fwsegsnr(x.samples, y.samples, 16000), 1e-6);
}

TEST(FwSegSnrTest, BandsAreMelSpaced) {
  const MelBands b = mel_bands(25, 16000);
  ASSERT_EQ(b.center.size(), 25);
  for (Index j = 1; j < 25; ++j) {
    EXPECT_GT(b.center[j], b.center[j - 1]);
    EXPECT_GT(b.width[j], b.width[j - 1]);
  }
  EXPECT_LT(b.center[24], 8000.0);
}

TEST(BestFractionTest, DropsLargest) {
  Eigen::VectorXd v(20);
  for (Index i = 0; i < 20; ++i) v[i] = double(19 - i);
  EXPECT_DOUBLE_EQ(best_fraction_mean(v, 0.95), 9.0);  // mean of 0..18
}

TEST(QualityTest, LlrMode) {
  const Waveform x = ar1(0.8, 8000, 26);
  EXPECT_EQ(quality_for_disc(x, x, QualityKind::kLlr).value, 0.0);
  EXPECT_DOUBLE_EQ(normalize_quality(1.0, QualityKind::kLlr).value, 0.5);
}

TEST(QualityTest, PesqWithoutProviderIsAnError) {
  const Waveform x = noise(8000, 27);
  EXPECT_THROW(quality_for_disc(x, x, QualityKind::kPesq), MetricError);
  PesqProvider none;
  EXPECT_THROW(quality_for_disc(x, x, QualityKind::kPesq, &none), MetricError);
}

TEST(QualityTest, ExternalProviderIsCalled) {
  namespace fs = std::filesystem;
  const fs::path script = fs::temp_directory_path() / "cmgan_fake_pesq.sh";
  {
    std::ofstream f(script);
    f << "#!/bin/sh\ntest -f \"$1\" && test -f \"$2\" && echo 2.0\n";
  }
  fs::permissions(script, fs::perms::owner_all);
  PesqProvider provider(script.string());
  const Waveform x = noise(4000, 28);
  const QualityScore q = quality_for_disc(x, x, QualityKind::kPesq, &provider);
  EXPECT_DOUBLE_EQ(q.value, 0.5);
  fs::remove(script);
}

}  // namespace
}  // namespace cmgan
