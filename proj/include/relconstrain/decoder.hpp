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

#include <cstdint>
#include <vector>

#include "relconstrain/constraints.hpp"
#include "relconstrain/lm.hpp"

namespace relconstrain {

struct DecoderConfig {
  int beam_width = 20;
  double lambda = 0.1;       // weight of the partial-match bonus
  int max_len = 32;          // generated tokens per candidate, <eos> included
  int expand_top = 20;       // most-likely continuations tried per candidate
  int clause_slack = 1;      // tolerated satisfied-clause gap at pruning
  int likelihood_keep = 40;  // global survivors before the clause filter

  // Throws std::invalid_argument on any field out of range
  // (likelihood_keep must be >= beam_width).
  void validate() const;
};

// One decoding hypothesis. `tokens` holds the generated body only: the
// conditioning prefix is excluded and so is the closing <eos> of a finished
// candidate. Invariant: nld_score == cum_logprob + lambda * max partial
// ratio of the tracker.
struct BeamCandidate {
  std::vector<int> tokens;
  double cum_logprob = 0.0;
  ConstraintTracker tracker;
  double nld_score = 0.0;
  bool finished = false;
};

struct DecodeResult {
  std::vector<int> tokens;  // body ids, <eos> excluded
  double cum_logprob = 0.0;
  double nld_score = 0.0;
  bool finished = false;       // ended with <eos> (vs. cut at max_len)
  bool all_satisfied = false;  // every clause satisfied (true for empty CNF)
};

// Per-step observability, also the payload behind the CLI --trace flag.
struct GroupTrace {
  std::uint64_t mask = 0;  // satisfied-clause bit set shared by the group
  int size = 0;
};

struct StepTrace {
  int step = 0;
  int expanded = 0;   // candidate extensions scored this step
  int kept = 0;       // after the likelihood prune
  int survivors = 0;  // after the clause-count filter
  std::vector<GroupTrace> groups;
  std::vector<BeamCandidate> beam;  // filled only when capture_beams is set
};

struct DecodeTrace {
  bool capture_beams = false;
  std::vector<StepTrace> steps;
};

// Modified likelihood: cum_logprob + lambda * max partial ratio over
// unsatisfied clauses.
double nld_score(const BeamCandidate& cand, const Cnf& cnf, double lambda);

// Plain beam search maximizing cumulative log-probability. Per step, every
// live candidate is extended by its expand_top most likely tokens, the
// likelihood_keep best extensions survive, extensions emitting <eos> move to
// a finished pool, and the beam_width best of the rest form the next beam.
// Returns the best finished candidate, or the best frontier candidate at
// max_len when nothing finished. Deterministic: ties break toward the
// lexicographically smaller token sequence (lower id first, then shorter).
DecodeResult beam_search(const LmInterface& lm, const std::vector<int>& prefix,
                         const DecoderConfig& cfg);

// Constrained decoding. Each step expands like beam_search, then:
//   prune  — keep the likelihood_keep best extensions by nld_score, then
//            drop any satisfying clause_slack+1 fewer clauses than the best;
//   group  — partition survivors by satisfied-clause set (at most 2^|cnf|
//            groups);
//   select — order groups by (satisfied count desc, mask asc), members by
//            (nld_score desc), and fill the beam round-robin, one candidate
//            per group per pass. Extensions emitting <eos> go to the
//            finished pool instead of the beam.
// The final answer is the finished candidate maximizing (all clauses
// satisfied, nld_score); the best frontier candidate at max_len when nothing
// finished. Same tie-breaking as beam_search. With an empty CNF the output
// equals beam_search token for token.
DecodeResult nld_decode(const LmInterface& lm, const std::vector<int>& prefix, const Cnf& cnf,
                        const DecoderConfig& cfg, DecodeTrace* trace = nullptr);

}  // namespace relconstrain
