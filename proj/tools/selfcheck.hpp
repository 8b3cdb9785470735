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

// Built-in verification suites shared by `cmgan selfcheck` and the
// acceptance runner.

#ifndef CMGAN_TOOLS_SELFCHECK_HPP_
#define CMGAN_TOOLS_SELFCHECK_HPP_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace cmgan {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct SelfCheckOptions {
  std::uint64_t seed = 0;
  // Corrupts every analytic gradient before comparison.
  bool inject_fault = false;
};

// Random 1-3 s waveforms through stft/istft at the default 400/100 Hamming
// setting; L-inf error away from the first and last half window.
std::vector<CheckResult> check_stft_round_trip(const SelfCheckOptions& opts = {});

// Finite differences against every analytic backward pass, at toy sizes.
std::vector<CheckResult> check_gradients(const SelfCheckOptions& opts = {});

// Each metric against the dense oracles on random 1 s pairs, plus the
// identity fixed points.
std::vector<CheckResult> check_metric_oracles(const SelfCheckOptions& opts = {});

std::vector<CheckResult> run_selfcheck(const SelfCheckOptions& opts = {});

bool all_passed(const std::vector<CheckResult>& results);

// One "PASS|FAIL suite/name value (threshold) detail" line per result.
void print_results(const std::vector<CheckResult>& results, std::ostream& os);

}  // namespace cmgan

#endif  // CMGAN_TOOLS_SELFCHECK_HPP_
