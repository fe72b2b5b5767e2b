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

#include "relconstrain/eval.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace relconstrain {

namespace {

double f1_of(double precision, double recall) {
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

using NGram = std::vector<std::string>;

std::map<NGram, long long> ngram_counts(const std::vector<std::string>& tokens, int n) {
  std::map<NGram, long long> counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t start = 0; start + static_cast<std::size_t>(n) <= tokens.size(); ++start)
    ++counts[NGram(tokens.begin() + static_cast<long>(start),
                   tokens.begin() + static_cast<long>(start) + n)];
  return counts;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

RougeTriple rouge_n(const std::vector<std::string>& candidate,
                    const std::vector<std::string>& reference, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n requires n >= 1");
  const auto cand_counts = ngram_counts(candidate, n);
  const auto ref_counts = ngram_counts(reference, n);

  long long cand_total = 0, ref_total = 0, overlap = 0;
  for (const auto& [ngram, count] : cand_counts) cand_total += count;
  for (const auto& [ngram, count] : ref_counts) ref_total += count;
  for (const auto& [ngram, count] : ref_counts) {
    auto it = cand_counts.find(ngram);
    if (it != cand_counts.end()) overlap += std::min(count, it->second);
  }

  RougeTriple t;
  t.precision = cand_total == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(cand_total);
  t.recall = ref_total == 0 ? 0.0 : static_cast<double>(overlap) / static_cast<double>(ref_total);
  t.f1 = f1_of(t.precision, t.recall);
  return t;
}

RougeTriple rouge_l(const std::vector<std::string>& candidate,
                    const std::vector<std::string>& reference) {
  RougeTriple t;
  if (candidate.empty() || reference.empty()) return t;
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  t.precision = lcs / static_cast<double>(candidate.size());
  t.recall = lcs / static_cast<double>(reference.size());
  t.f1 = f1_of(t.precision, t.recall);
  return t;
}

RougeScores rouge_all(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference) {
  RougeScores s;
  s.r1 = rouge_n(candidate, reference, 1);
  s.r2 = rouge_n(candidate, reference, 2);
  s.rl = rouge_l(candidate, reference);
  return s;
}

PairedTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired t-test needs equal-length inputs");
  if (a.size() < 2) throw std::invalid_argument("paired t-test needs at least two pairs");

  const std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = (a[i] - b[i]) - mean;
    ss += dev * dev;
  }
  const double var = ss / static_cast<double>(n - 1);

  PairedTestResult result;
  result.df = static_cast<int>(n) - 1;
  if (var == 0.0) {
    // Degenerate: constant differences.
    if (mean == 0.0) {
      result.t_stat = 0.0;
      result.p_value = 1.0;
    } else {
      result.t_stat = mean > 0.0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
      result.p_value = 0.0;
    }
    return result;
  }

  result.t_stat = mean / std::sqrt(var / static_cast<double>(n));
  // Two-sided p from the t CDF (regularized incomplete beta underneath).
  const boost::math::students_t dist(static_cast<double>(result.df));
  result.p_value = 2.0 * boost::math::cdf(dist, -std::abs(result.t_stat));
  return result;
}

}  // namespace relconstrain
