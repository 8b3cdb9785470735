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

#include "cmgan/losses.hpp"
#include "cmgan/model_checks.hpp"
#include "cmgan/nn/grad_check.hpp"

namespace cmgan {
namespace {

Tensor<double> scalar_grid(double v) { return Tensor<double>({1, 1, 1}, v); }

TEST(TfLossTest, ZeroAtIdentity) {
  const auto ri = random_normal({2, 3, 4, 2}, 1), mag = random_normal({2, 3, 4}, 2);
  const auto l = tf_loss(ri, mag, ri, mag, 0.7);
  EXPECT_EQ(l.value, 0.0);
  EXPECT_EQ(l.grad_ri.flat().norm(), 0.0);
}

TEST(TfLossTest, MagnitudeOnlyExample) {
  const Tensor<double> ri({1, 1, 1, 2}, 0.3);
  const auto l = tf_loss(ri, scalar_grid(2.0), ri, scalar_grid(0.0), 0.7);
  EXPECT_NEAR(l.value, 2.8, 1e-12);
}

TEST(TfLossTest, AlphaEndpoints) {
  const auto ri = random_normal({1, 2, 3, 2}, 3), ri2 = random_normal({1, 2, 3, 2}, 4);
  const auto m = random_normal({1, 2, 3}, 5), m2 = random_normal({1, 2, 3}, 6);
  const auto pure_mag = tf_loss(ri, m, ri2, m2, 1.0);
  const auto pure_cplx = tf_loss(ri, m, ri2, m2, 0.0);
  EXPECT_DOUBLE_EQ(pure_mag.value, pure_mag.magnitude);
  EXPECT_DOUBLE_EQ(pure_cplx.value, pure_cplx.complex);
  EXPECT_EQ(pure_mag.grad_ri.flat().norm(), 0.0);
  EXPECT_EQ(pure_cplx.grad_mag.flat().norm(), 0.0);
}

TEST(TfLossTest, ComplexTermSumsRealAndImaginaryMse) {
  Tensor<double> a({1, 1, 2, 2}), b({1, 1, 2, 2});
  a[0] = 1.0;  // real error 1 in one of two bins, imaginary error 2 in the other
  a[3] = 2.0;
  const Tensor<double> m({1, 1, 2});
  EXPECT_NEAR(tf_loss(b, m, a, m, 0.0).value, 0.5 + 2.0, 1e-12);
}

TEST(TfLossTest, GradientMatchesFiniteDifferences) {
  const auto ri = random_normal({2, 3, 5, 2}, 7), mag = random_normal({2, 3, 5}, 8);
  const auto est_ri = random_normal({2, 3, 5, 2}, 9), est_mag = random_normal({2, 3, 5}, 10);
  const auto l = tf_loss(ri, mag, est_ri, est_mag, 0.7);
  const auto e_ri = check_scalar_function(
      "ri", est_ri, l.grad_ri,
      [&](const Tensor<double>& x) { return tf_loss(ri, mag, x, est_mag, 0.7).value; });
  const auto e_mag = check_scalar_function(
      "mag", est_mag, l.grad_mag,
      [&](const Tensor<double>& x) { return tf_loss(ri, mag, est_ri, x, 0.7).value; });
  EXPECT_LT(e_ri.max_rel_error, 1e-6);
  EXPECT_LT(e_mag.max_rel_error, 1e-6);
}

TEST(TfLossTest, ShapeMismatchThrows) {
  EXPECT_THROW(tf_loss(random_normal({1, 2, 3, 2}, 1), random_normal({1, 2, 3}, 1),
                       random_normal({1, 2, 4, 2}, 1), random_normal({1, 2, 3}, 1), 0.7),
               ShapeError);
}

TEST(TimeLossTest, Examples) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(10, -1.0, 1.0);
  EXPECT_EQ(time_loss({x}, {x}).value, 0.0);
  EXPECT_NEAR(time_loss({x}, {(x.array() + 0.5).matrix()}).value, 0.5, 1e-15);
  EXPECT_NEAR(time_loss({Eigen::Vector2d(0, 1)}, {Eigen::Vector2d(1, 1)}).value, 0.5, 1e-15);
}

TEST(TimeLossTest, AveragesOverAllSamples) {
  const Eigen::VectorXd a = Eigen::VectorXd::Zero(2), b = Eigen::VectorXd::Zero(6);
  const auto l = time_loss({a, b}, {Eigen::VectorXd::Constant(2, 4.0), b});
  EXPECT_NEAR(l.value, 1.0, 1e-15);
  EXPECT_NEAR(l.grad[0][0], 1.0 / 8.0, 1e-15);
}

TEST(TimeLossTest, GradientMatchesFiniteDifferences) {
  const Tensor<double> clean = random_normal({40}, 11), est = random_normal({40}, 12);
  auto as_vec = [](const Tensor<double>& t) { return Eigen::VectorXd(t.flat()); };
  const auto l = time_loss({as_vec(clean)}, {as_vec(est)});
  Tensor<double> analytic({40});
  analytic.flat() = l.grad[0];
  const auto e = check_scalar_function("estimate", est, analytic, [&](const Tensor<double>& x) {
    return time_loss({as_vec(clean)}, {as_vec(x)}).value;
  });
  EXPECT_LT(e.max_rel_error, 1e-6);
}

TEST(TimeLossTest, LengthMismatchThrows) {
  EXPECT_THROW(time_loss({Eigen::VectorXd::Zero(3)}, {Eigen::VectorXd::Zero(4)}),
               std::invalid_argument);
}

TEST(GenAdvLossTest, Examples) {
  const Tensor<double> half({2, 1}, 0.5);
  EXPECT_NEAR(gen_adv_loss(half, 1.0).value, 0.25, 1e-15);
  EXPECT_NEAR(gen_adv_loss(half, 0.0).value, 0.25, 1e-15);
  EXPECT_EQ(gen_adv_loss(Tensor<double>({3, 1}, 1.0), 1.0).value, 0.0);
}

TEST(GenAdvLossTest, GradientMatchesFiniteDifferences) {
  const auto s = random_normal({4, 1}, 13);
  const auto l = gen_adv_loss(s, 1.0);
  const auto e = check_scalar_function(
      "scores", s, l.grad, [](const Tensor<double>& x) { return gen_adv_loss(x, 1.0).value; });
  EXPECT_LT(e.max_rel_error, 1e-6);
}

TEST(DiscLossTest, Examples) {
  const Tensor<double> half({1, 1}, 0.5);
  EXPECT_NEAR(disc_loss(half, half, {1.0}, 1.0).value, 0.5, 1e-15);
  const Tensor<double> zero({2, 1}, 0.0);
  EXPECT_EQ(disc_loss(zero, zero, {0.0, 0.0}, 0.0).value, 0.0);
  Tensor<double> enh({2, 1});
  enh[0] = 0.3;
  enh[1] = 0.8;
  EXPECT_EQ(disc_loss(Tensor<double>({2, 1}, 1.0), enh, {0.3, 0.8}, 1.0).value, 0.0);
}

TEST(DiscLossTest, BatchMismatchThrows) {
  const Tensor<double> s({2, 1}, 0.5);
  EXPECT_THROW(disc_loss(s, s, {0.5}, 1.0), ShapeError);
}

TEST(TotalGenLossTest, DefaultWeights) {
  const LossWeights w;
  EXPECT_NEAR(total_gen_loss({1.0, 1.0, 1.0}, w), 2.01, 1e-15);
  EXPECT_EQ(total_gen_loss({}, w), 0.0);
}

TEST(TotalGenLossTest, LinearInEachPart) {
  LossWeights w;
  const GenLossParts p{0.3, 0.7, 0.2};
  const double base = total_gen_loss(p, w);
  w.gamma_gan *= 2.0;
  EXPECT_NEAR(total_gen_loss(p, w) - base, 0.01 * 0.7, 1e-15);
}

TEST(LossWeightsTest, Validation) {
  EXPECT_NO_THROW(LossWeights{}.validate());
  EXPECT_THROW((LossWeights{1.5, 1, 0.01, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((LossWeights{0.7, 1, -0.01, 1}.validate()), std::invalid_argument);
}

TEST(NormalizeQualityTest, Endpoints) {
  EXPECT_DOUBLE_EQ(normalize_quality(4.5, QualityKind::kPesq).value, 1.0);
  EXPECT_DOUBLE_EQ(normalize_quality(-0.5, QualityKind::kPesq).value, 0.0);
  EXPECT_DOUBLE_EQ(normalize_quality(2.0, QualityKind::kPesq).value, 0.5);
  EXPECT_DOUBLE_EQ(normalize_quality(0.0, QualityKind::kLlr).value, 0.0);
  EXPECT_DOUBLE_EQ(normalize_quality(2.0, QualityKind::kLlr).value, 1.0);
}

TEST(NormalizeQualityTest, Clamps) {
  EXPECT_DOUBLE_EQ(normalize_quality(5.0, QualityKind::kPesq).value, 1.0);
  EXPECT_DOUBLE_EQ(normalize_quality(-1.0, QualityKind::kPesq).value, 0.0);
  EXPECT_DOUBLE_EQ(normalize_quality(3.0, QualityKind::kLlr).value, 1.0);
  EXPECT_DOUBLE_EQ(normalize_quality(-0.1, QualityKind::kLlr).value, 0.0);
  EXPECT_THROW(normalize_quality(std::nan(""), QualityKind::kLlr), std::invalid_argument);
}

TEST(NormalizeQualityTest, CleanTargets) {
  EXPECT_EQ(clean_target(QualityKind::kPesq), 1.0);
  EXPECT_EQ(clean_target(QualityKind::kLlr), 0.0);
  EXPECT_EQ(parse_quality_kind(to_string(QualityKind::kLlr)), QualityKind::kLlr);
  EXPECT_THROW(parse_quality_kind("stoi"), std::invalid_argument);
}

}  // namespace
}  // namespace cmgan
