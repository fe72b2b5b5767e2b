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

#include "relconstrain/decoder.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <map>
#include <stdexcept>

namespace relconstrain {

namespace {

// Token ids of the expand_top most likely continuations, by logprob
// descending with lower id winning ties.
std::vector<int> top_token_ids(const std::vector<double>& logprobs, int expand_top) {
  std::vector<int> ids(logprobs.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(expand_top), ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<long>(k), ids.end(),
                    [&](int a, int b) {
                      if (logprobs[static_cast<std::size_t>(a)] != logprobs[static_cast<std::size_t>(b)])
                        return logprobs[static_cast<std::size_t>(a)] > logprobs[static_cast<std::size_t>(b)];
                      return a < b;
                    });
  ids.resize(k);
  return ids;
}

// Score-descending ordering with a lexicographic token tie-break: within a
// step all candidate bodies are distinct, so this is a strict total order.
bool better(const BeamCandidate& a, const BeamCandidate& b) {
  if (a.nld_score != b.nld_score) return a.nld_score > b.nld_score;
  return a.tokens < b.tokens;
}

DecodeResult to_result(const BeamCandidate& cand, const Cnf& cnf) {
  DecodeResult r;
  r.tokens = cand.tokens;
  r.cum_logprob = cand.cum_logprob;
  r.nld_score = cand.nld_score;
  r.finished = cand.finished;
  r.all_satisfied = cand.tracker.all_satisfied(cnf);
  return r;
}

// (all satisfied, score, lexicographic) final ordering for nld_decode.
bool better_final(const BeamCandidate& a, const BeamCandidate& b, const Cnf& cnf) {
  const bool sa = a.tracker.all_satisfied(cnf);
  const bool sb = b.tracker.all_satisfied(cnf);
  if (sa != sb) return sa;
  if (a.nld_score != b.nld_score) return a.nld_score > b.nld_score;
  return a.tokens < b.tokens;
}

}  // namespace

void DecoderConfig::validate() const {
  if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  if (expand_top < 1) throw std::invalid_argument("expand_top must be >= 1");
  if (clause_slack < 0) throw std::invalid_argument("clause_slack must be >= 0");
  if (likelihood_keep < beam_width)
    throw std::invalid_argument("likelihood_keep must be >= beam_width");
}

double nld_score(const BeamCandidate& cand, const Cnf& cnf, double lambda) {
  return cand.cum_logprob + lambda * max_partial_ratio(cand.tracker, cnf);
}

DecodeResult beam_search(const LmInterface& lm, const std::vector<int>& prefix,
                         const DecoderConfig& cfg) {
  cfg.validate();

  BeamCandidate root;
  std::vector<BeamCandidate> beam{root};
  std::vector<BeamCandidate> finished;

  std::vector<int> context = prefix;
  for (int step = 1; step <= cfg.max_len && !beam.empty(); ++step) {
    std::vector<BeamCandidate> expansions;
    expansions.reserve(beam.size() * static_cast<std::size_t>(cfg.expand_top));
    for (const BeamCandidate& cand : beam) {
      context.resize(prefix.size());
      context.insert(context.end(), cand.tokens.begin(), cand.tokens.end());
      const std::vector<double> logprobs = lm.next_token_logprobs(context);
      for (int tok : top_token_ids(logprobs, cfg.expand_top)) {
        BeamCandidate next = cand;
        next.cum_logprob += logprobs[static_cast<std::size_t>(tok)];
        next.nld_score = next.cum_logprob;
        if (tok == Vocabulary::kEosId) {
          next.finished = true;
        } else {
          next.tokens.push_back(tok);
        }
        expansions.push_back(std::move(next));
      }
    }
    std::sort(expansions.begin(), expansions.end(), better);
    if (expansions.size() > static_cast<std::size_t>(cfg.likelihood_keep))
      expansions.resize(static_cast<std::size_t>(cfg.likelihood_keep));

    std::vector<BeamCandidate> next_beam;
    for (BeamCandidate& cand : expansions) {
      if (cand.finished) {
        finished.push_back(std::move(cand));
      } else if (next_beam.size() < static_cast<std::size_t>(cfg.beam_width)) {
        next_beam.push_back(std::move(cand));
      }
    }
    beam = std::move(next_beam);
  }

  const Cnf empty_cnf;
  const std::vector<BeamCandidate>& pool = finished.empty() ? beam : finished;
  const BeamCandidate* best = nullptr;
  for (const BeamCandidate& cand : pool)
    if (best == nullptr || better(cand, *best)) best = &cand;
  if (best == nullptr) throw std::logic_error("decode produced no candidates");
  return to_result(*best, empty_cnf);
}

DecodeResult nld_decode(const LmInterface& lm, const std::vector<int>& prefix, const Cnf& cnf,
                        const DecoderConfig& cfg, DecodeTrace* trace) {
  cfg.validate();
  if (cnf.clauses.size() > 63)
    throw std::invalid_argument("at most 63 clauses are supported");

  const Vocabulary& vocab = lm.vocab();
  const std::size_t window_len = cnf.max_literal_len() > 0 ? cnf.max_literal_len() - 1 : 0;

  BeamCandidate root;
  root.tracker = ConstraintTracker::start(cnf);
  root.nld_score = nld_score(root, cnf, cfg.lambda);

  std::vector<BeamCandidate> beam{root};
  std::vector<BeamCandidate> finished;

  std::vector<int> context = prefix;
  std::vector<std::string> window;
  for (int step = 1; step <= cfg.max_len && !beam.empty(); ++step) {
    // Expand: each live candidate by its expand_top most likely tokens.
    std::vector<BeamCandidate> expansions;
    expansions.reserve(beam.size() * static_cast<std::size_t>(cfg.expand_top));
    for (const BeamCandidate& cand : beam) {
      context.resize(prefix.size());
      context.insert(context.end(), cand.tokens.begin(), cand.tokens.end());
      const std::vector<double> logprobs = lm.next_token_logprobs(context);

      window.clear();
      const std::size_t tail = std::min(window_len, cand.tokens.size());
      for (std::size_t i = cand.tokens.size() - tail; i < cand.tokens.size(); ++i)
        window.push_back(vocab.surface(cand.tokens[i]));

      for (int tok : top_token_ids(logprobs, cfg.expand_top)) {
        BeamCandidate next = cand;
        next.cum_logprob += logprobs[static_cast<std::size_t>(tok)];
        next.tracker = advance(cand.tracker, cnf, window, vocab.surface(tok));
        next.nld_score = nld_score(next, cnf, cfg.lambda);
        if (tok == Vocabulary::kEosId) {
          next.finished = true;
        } else {
          next.tokens.push_back(tok);
        }
        assert(std::abs(next.nld_score -
                        (next.cum_logprob + cfg.lambda * max_partial_ratio(next.tracker, cnf))) <
               1e-12);
        expansions.push_back(std::move(next));
      }
    }
    const int expanded = static_cast<int>(expansions.size());

    // Prune: global top likelihood_keep by score, then the clause filter.
    std::sort(expansions.begin(), expansions.end(), better);
    if (expansions.size() > static_cast<std::size_t>(cfg.likelihood_keep))
      expansions.resize(static_cast<std::size_t>(cfg.likelihood_keep));
    const int kept = static_cast<int>(expansions.size());

    int max_satisfied = 0;
    for (const BeamCandidate& cand : expansions)
      max_satisfied = std::max(max_satisfied, cand.tracker.satisfied_count());
    std::erase_if(expansions, [&](const BeamCandidate& cand) {
      return cand.tracker.satisfied_count() < max_satisfied - cfg.clause_slack;
    });

    // Finished candidates leave the search here.
    std::vector<BeamCandidate> survivors;
    survivors.reserve(expansions.size());
    for (BeamCandidate& cand : expansions) {
      if (cand.finished)
        finished.push_back(std::move(cand));
      else
        survivors.push_back(std::move(cand));
    }

    // Group by satisfied-clause set; insertion keeps the score order within
    // each group.
    std::map<std::uint64_t, std::vector<BeamCandidate>> by_mask;
    for (BeamCandidate& cand : survivors)
      by_mask[cand.tracker.satisfied_mask()].push_back(std::move(cand));

    std::vector<std::pair<std::uint64_t, std::vector<BeamCandidate>>> groups;
    groups.reserve(by_mask.size());
    for (auto& [mask, members] : by_mask) groups.emplace_back(mask, std::move(members));
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
      const int pa = std::popcount(a.first), pb = std::popcount(b.first);
      if (pa != pb) return pa > pb;
      return a.first < b.first;
    });

    if (trace) {
      StepTrace st;
      st.step = step;
      st.expanded = expanded;
      st.kept = kept;
      st.survivors = static_cast<int>(survivors.size());
      for (const auto& [mask, members] : groups)
        st.groups.push_back(GroupTrace{mask, static_cast<int>(members.size())});
      trace->steps.push_back(std::move(st));
    }

    // Select: fill the beam round-robin, one candidate per group per pass.
    std::vector<BeamCandidate> next_beam;
    std::vector<std::size_t> cursor(groups.size(), 0);
    bool progressed = true;
    while (next_beam.size() < static_cast<std::size_t>(cfg.beam_width) && progressed) {
      progressed = false;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (cursor[g] >= groups[g].second.size()) continue;
        next_beam.push_back(std::move(groups[g].second[cursor[g]++]));
        progressed = true;
        if (next_beam.size() == static_cast<std::size_t>(cfg.beam_width)) break;
      }
    }
    beam = std::move(next_beam);

    if (trace && trace->capture_beams) trace->steps.back().beam = beam;
  }

  const std::vector<BeamCandidate>& pool = finished.empty() ? beam : finished;
  const BeamCandidate* best = nullptr;
  for (const BeamCandidate& cand : pool)
    if (best == nullptr || better_final(cand, *best, cnf)) best = &cand;
  if (best == nullptr) throw std::logic_error("decode produced no candidates");
  return to_result(*best, cnf);
}

}  // namespace relconstrain
