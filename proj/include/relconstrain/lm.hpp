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

#include <map>
#include <string>
#include <vector>

#include "relconstrain/text.hpp"

namespace relconstrain {

// Next-token probability source. Implementations return one finite
// log-probability per vocabulary id for any prefix; the implied distribution
// must sum to 1 (within 1e-9). Trained models are immutable and safe for
// concurrent queries.
class LmInterface {
 public:
  virtual ~LmInterface() = default;

  virtual const Vocabulary& vocab() const = 0;

  // Full next-token distribution given the generated prefix (most recent id
  // last). Throws std::out_of_range("token out of vocabulary") when the
  // prefix contains an invalid id.
  virtual std::vector<double> next_token_logprobs(const std::vector<int>& prefix) const = 0;
};

// Add-k smoothed n-gram model. Training pads every sentence with (order-1)
// <bos> tokens and one closing <eos>; queries pad short prefixes the same
// way, and only the last (order-1) ids of a long prefix matter.
class NGramLm final : public LmInterface {
 public:
  struct ContextCounts {
    std::map<int, long long> next;  // next id -> observed count (>= 1)
    long long total = 0;            // sum of next counts
  };

  // order >= 1, smoothing_k > 0, corpus non-empty. Throws
  // std::invalid_argument on violations.
  static NGramLm train(Vocabulary vocab, const std::vector<std::vector<int>>& corpus,
                       int order, double smoothing_k);

  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<double> next_token_logprobs(const std::vector<int>& prefix) const override;

  int order() const { return order_; }
  double smoothing_k() const { return smoothing_k_; }
  const std::map<std::vector<int>, ContextCounts>& counts() const { return counts_; }

  // Versioned line-oriented text format ("RELCONSTRAIN-LM v1"). A reloaded
  // model reproduces the saved one's distributions bit for bit.
  void save(const std::string& path) const;
  static NGramLm load(const std::string& path);

 private:
  NGramLm(Vocabulary vocab, int order, double smoothing_k)
      : vocab_(std::move(vocab)), order_(order), smoothing_k_(smoothing_k) {}

  Vocabulary vocab_;
  int order_ = 1;
  double smoothing_k_ = 1.0;
  std::map<std::vector<int>, ContextCounts> counts_;
};

}  // namespace relconstrain
