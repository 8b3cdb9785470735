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

#include <sstream>

#include "selfcheck.hpp"

namespace cmgan {
namespace {

TEST(SelfCheckTest, StftRoundTripPasses) {
  const auto r = check_stft_round_trip();
  ASSERT_EQ(r.size(), 1u);
  EXPECT_TRUE(r[0].passed) << r[0].value;
}

TEST(SelfCheckTest, EveryGradientPasses) {
  const auto results = check_gradients();
  EXPECT_EQ(results.size(), 10u);
  for (const auto& r : results) EXPECT_TRUE(r.passed) << r.name << " " << r.value << " " << r.detail;
}

TEST(SelfCheckTest, InjectedFaultFailsEveryGradient) {
  const auto results = check_gradients({.inject_fault = true});
  for (const auto& r : results) EXPECT_FALSE(r.passed) << r.name;
  EXPECT_FALSE(all_passed(results));
}

TEST(SelfCheckTest, MetricOraclesAgree) {
  const auto results = check_metric_oracles();
  EXPECT_EQ(results.size(), 14u);
  for (const auto& r : results) EXPECT_TRUE(r.passed) << r.name << " " << r.value;
}

TEST(SelfCheckTest, ReportHasOneLinePerCheck) {
  std::vector<CheckResult> rs = {{"a", "x", true, 0.0, 1.0, ""},
                                 {"b", "y", false, 2.0, 1.0, "detail"}};
  std::ostringstream os;
  print_results(rs, os);
  EXPECT_EQ(os.str(), "PASS a/x 0 (threshold 1)\nFAIL b/y 2 (threshold 1) detail\n");
  EXPECT_FALSE(all_passed(rs));
}

}  // namespace
}  // namespace cmgan
