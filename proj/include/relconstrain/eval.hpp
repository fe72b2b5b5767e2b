// Copyright 2026 The relconstrain Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

namespace relconstrain {

struct RougeTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct RougeScores {
  RougeTriple r1, r2, rl;
};

// Clipped n-gram overlap. recall = overlap / reference n-grams, precision =
// overlap / candidate n-grams; all zero when either side has no n-grams.
RougeTriple rouge_n(const std::vector<std::string>& candidate,
                    const std::vector<std::string>& reference, int n);

// Longest-common-subsequence variant: recall = LCS/|reference|,
// precision = LCS/|candidate|.
RougeTriple rouge_l(const std::vector<std::string>& candidate,
                    const std::vector<std::string>& reference);

RougeScores rouge_all(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference);

struct PairedTestResult {
  double t_stat = 0.0;
  double p_value = 1.0;
  int df = 0;
};

// Two-sided paired t-test on a - b. Requires equally sized inputs with at
// least two pairs. Zero-variance differences degenerate to t = +/-inf, p = 0
// (nonzero mean) or t = 0, p = 1 (zero mean).
PairedTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace relconstrain
