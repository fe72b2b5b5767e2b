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

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "relconstrain/decoder.hpp"

using namespace relconstrain;

namespace {

// vocab {<bos>, <eos>, <unk>, a, b} with stationary P(a)=0.6, P(b)=0.3,
// P(<eos>)=0.1 (specials other than <eos> get vanishing mass).
testoracle::StationaryLm make_ab_lm(double pa = 0.6, double pb = 0.3, double peos = 0.1) {
  Vocabulary vocab = Vocabulary::from_corpus({{"a", "b"}});
  const double eps = 1e-12;
  std::vector<double> probs(5, eps);
  probs[static_cast<std::size_t>(vocab.id("a"))] = pa - eps;
  probs[static_cast<std::size_t>(vocab.id("b"))] = pb - eps;
  probs[Vocabulary::kEosId] = peos;
  return testoracle::StationaryLm(std::move(vocab), std::move(probs));
}

NGramLm train_on(const std::vector<std::vector<std::string>>& corpus, int order, double k) {
  Vocabulary vocab = Vocabulary::from_corpus(corpus);
  std::vector<std::vector<int>> ids;
  for (const auto& s : corpus) ids.push_back(vocab.encode(s));
  return NGramLm::train(std::move(vocab), ids, order, k);
}

}  // namespace

TEST_CASE("config validation") {
  DecoderConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.beam_width = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = DecoderConfig{};
  cfg.lambda = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = DecoderConfig{};
  cfg.likelihood_keep = cfg.beam_width - 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = DecoderConfig{};
  cfg.max_len = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = DecoderConfig{};
  cfg.expand_top = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = DecoderConfig{};
  cfg.clause_slack = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("nld score arithmetic") {
  Cnf cnf;
  cnf.clauses.push_back(Clause{{Literal{{"apple", "tree"}, "apple tree"}}});
  cnf.clauses.push_back(Clause{{Literal{{"oak"}, "oak"}}});

  BeamCandidate cand;
  cand.tracker = ConstraintTracker::start(cnf);
  cand.tracker = advance(cand.tracker, cnf, {}, "apple");  // ratios {0.5, 0.0}
  cand.cum_logprob = -1.2;
  CHECK(nld_score(cand, cnf, 0.1) == doctest::Approx(-1.15).epsilon(1e-12));
  CHECK(nld_score(cand, cnf, 0.0) == doctest::Approx(-1.2).epsilon(1e-12));

  Cnf satisfied_cnf;
  satisfied_cnf.clauses.push_back(Clause{{Literal{{"apple"}, "apple"}}});
  BeamCandidate done;
  done.tracker = ConstraintTracker::start(satisfied_cnf);
  done.tracker = advance(done.tracker, satisfied_cnf, {}, "apple");
  done.cum_logprob = -2.0;
  CHECK(nld_score(done, satisfied_cnf, 0.5) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("beam search with width 1 and expand 1 is greedy") {
  const auto lm = make_ab_lm();
  DecoderConfig cfg;
  cfg.beam_width = 1;
  cfg.likelihood_keep = 1;
  cfg.expand_top = 1;
  cfg.max_len = 4;
  const auto result = beam_search(lm, {}, cfg);
  // argmax is always "a"; <eos> never enters, so the frontier is a a a a.
  const int a = lm.vocab().id("a");
  CHECK(result.tokens == std::vector<int>{a, a, a, a});
  CHECK_FALSE(result.finished);
}

TEST_CASE("beam search matches exhaustive enumeration on the stationary lm") {
  const auto lm = make_ab_lm();
  DecoderConfig cfg;
  cfg.beam_width = 9;
  cfg.likelihood_keep = 32;
  cfg.expand_top = lm.vocab().size();
  cfg.max_len = 2;
  const auto result = beam_search(lm, {}, cfg);
  // Best <eos>-terminated sequence of length <= 2 is immediate <eos>
  // (ln 0.1 > ln 0.6 + ln 0.1).
  const auto oracle = testoracle::best_by_enumeration(lm, {}, Cnf{}, 0.0, cfg.max_len);
  CHECK(result.finished);
  CHECK(result.cum_logprob == doctest::Approx(oracle.score).epsilon(1e-12));
  CHECK(result.tokens.empty());
}

TEST_CASE("immediate eos dominance yields the empty body") {
  const auto lm = make_ab_lm(0.005, 0.005, 0.99);
  DecoderConfig cfg;
  cfg.beam_width = 3;
  cfg.likelihood_keep = 6;
  cfg.max_len = 8;
  cfg.expand_top = 5;
  const auto result = beam_search(lm, {}, cfg);
  CHECK(result.tokens.empty());
  CHECK(result.finished);
}

TEST_CASE("nld decode with an empty cnf equals beam search") {
  testoracle::Rng rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const auto lm = testoracle::random_ngram_lm(rng, 7, 3);
    const auto cfg = testoracle::random_decoder_config(rng, lm.vocab().size());
    std::vector<int> prefix;
    for (int i = 0, n = rng.uniform_int(0, 3); i < n; ++i)
      prefix.push_back(rng.uniform_int(3, lm.vocab().size() - 1));
    const auto plain = beam_search(lm, prefix, cfg);
    const auto constrained = nld_decode(lm, prefix, Cnf{}, cfg);
    REQUIRE(plain.tokens == constrained.tokens);
    REQUIRE(plain.cum_logprob == constrained.cum_logprob);  // bitwise
  }
}

TEST_CASE("constrained decode finds the best b-containing sequence") {
  const auto lm = make_ab_lm(0.7, 0.2, 0.1);
  Cnf cnf;
  cnf.clauses.push_back(Clause{{Literal{{"b"}, "b"}}});
  DecoderConfig cfg;
  cfg.beam_width = 9;
  cfg.likelihood_keep = 200;
  cfg.expand_top = lm.vocab().size();
  cfg.max_len = 3;
  cfg.clause_slack = static_cast<int>(cnf.clauses.size());  // exhaustive: no clause pruning
  cfg.lambda = 0.1;

  DecodeTrace trace;
  const auto result = nld_decode(lm, {}, cnf, cfg, &trace);
  CHECK(result.all_satisfied);
  const auto surfaces = lm.vocab().decode(result.tokens);
  CHECK(cnf_satisfied(cnf, surfaces));

  const auto oracle = testoracle::best_by_enumeration(lm, {}, cnf, cfg.lambda, cfg.max_len);
  CHECK(oracle.satisfied == result.all_satisfied);
  CHECK(result.nld_score == doctest::Approx(oracle.score).epsilon(1e-12));

  // Group bound: at most 2^|C| groups at every step.
  for (const auto& step : trace.steps) {
    CHECK(static_cast<int>(step.groups.size()) <= (1 << cnf.clauses.size()));
    CHECK(static_cast<int>(step.groups.size()) <= step.survivors);
  }
}

TEST_CASE("exhaustive-width decode attains the brute-force optimum") {
  testoracle::Rng rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const auto lm = testoracle::random_ngram_lm(rng, 3, 2);  // |V| <= 6
    const int v = lm.vocab().size();
    std::vector<std::string> regular;
    for (int i = 3; i < v; ++i) regular.push_back(lm.vocab().surface(i));
    if (regular.empty()) regular.push_back("w0");
    const Cnf cnf = testoracle::random_cnf(rng, regular, 3, 2, 2);

    DecoderConfig cfg;
    cfg.max_len = rng.uniform_int(1, 4);
    int full = 1;
    for (int i = 0; i < cfg.max_len; ++i) full *= v;
    cfg.beam_width = full;
    cfg.likelihood_keep = full * v;
    cfg.expand_top = v;
    cfg.clause_slack = static_cast<int>(cnf.clauses.size());
    const std::vector<double> lambdas{0.0, 0.1, 0.7};
    cfg.lambda = rng.pick(lambdas);

    const auto result = nld_decode(lm, {}, cnf, cfg);
    const auto oracle = testoracle::best_by_enumeration(lm, {}, cnf, cfg.lambda, cfg.max_len);
    REQUIRE(result.all_satisfied == oracle.satisfied);
    REQUIRE(std::abs(result.nld_score - oracle.score) < 1e-9);
  }
}

TEST_CASE("decoding is deterministic") {
  testoracle::Rng rng(59);
  const auto lm = testoracle::random_ngram_lm(rng, 6, 3);
  std::vector<std::string> regular;
  for (int i = 3; i < lm.vocab().size(); ++i) regular.push_back(lm.vocab().surface(i));
  const Cnf cnf = testoracle::random_cnf(rng, regular, 3, 2, 2);
  DecoderConfig cfg;
  cfg.beam_width = 4;
  cfg.likelihood_keep = 8;
  cfg.expand_top = 4;
  cfg.max_len = 10;
  const auto r1 = nld_decode(lm, {}, cnf, cfg);
  const auto r2 = nld_decode(lm, {}, cnf, cfg);
  CHECK(r1.tokens == r2.tokens);
  CHECK(r1.nld_score == r2.nld_score);
}

TEST_CASE("clause count pruning respects the slack") {
  // Two clauses; a candidate satisfying none must survive when the slack
  // allows it and be dropped when it does not.
  const auto lm = train_on({{"p", "q", "r"}, {"p", "q", "s"}}, 2, 1.0);
  Cnf cnf;
  cnf.clauses.push_back(Clause{{Literal{{"p"}, "p"}}});
  cnf.clauses.push_back(Clause{{Literal{{"q"}, "q"}}});

  DecoderConfig cfg;
  cfg.beam_width = 8;
  cfg.likelihood_keep = 64;
  cfg.expand_top = lm.vocab().size();
  cfg.max_len = 4;
  cfg.clause_slack = 0;
  DecodeTrace strict;
  nld_decode(lm, {}, cnf, cfg, &strict);
  for (const auto& step : strict.steps) {
    // With zero slack every surviving group has the maximal satisfied count.
    if (!step.groups.empty()) {
      const int top = std::popcount(step.groups.front().mask);
      for (const auto& g : step.groups) CHECK(std::popcount(g.mask) == top);
    }
  }

  cfg.clause_slack = 2;
  DecodeTrace loose;
  nld_decode(lm, {}, cnf, cfg, &loose);
  std::size_t max_groups = 0;
  for (const auto& step : loose.steps) max_groups = std::max(max_groups, step.groups.size());
  CHECK(max_groups >= 2);  // slack keeps diverse satisfaction states alive
}

TEST_CASE("decode output satisfies all clauses on the worked fixture") {
  // A tiny corpus where the constraint tokens are reachable; the decoded
  // output must contain one surface from every clause.
  const auto lm = train_on(
      {
          {"environmental", "and", "health", "standards", "are", "often", "violated", "by",
           "water", "privatization", "companies"},
          {"environmental", "and", "health", "standards", "are", "often", "violated", "by",
           "public", "owners", "of", "water"},
          {"private", "companies", "often", "view", "health", "and", "safety", "standards", "as",
           "obstacles"},
      },
      3, 0.1);

  MorphologyTable table;
  table.add("private", {"privates", "privatization", "privatize"});
  table.add("health", {"healthy"});
  table.add("standard", {"standards"});
  const Cnf cnf = build_cnf({"private", "health", "standard"}, table);

  DecoderConfig cfg;
  cfg.beam_width = 20;
  cfg.likelihood_keep = 40;
  cfg.expand_top = lm.vocab().size();
  cfg.max_len = 16;

  const auto result = nld_decode(lm, {}, cnf, cfg);
  const auto surfaces = lm.vocab().decode(result.tokens);
  CHECK(result.all_satisfied);
  CHECK(cnf_satisfied(cnf, surfaces));

  // The unconstrained output misses at least one clause here.
  const auto plain = beam_search(lm, {}, cfg);
  CHECK_FALSE(cnf_satisfied(cnf, lm.vocab().decode(plain.tokens)));
}

TEST_CASE("more than 63 clauses are rejected") {
  const auto lm = train_on({{"a"}}, 1, 1.0);
  Cnf cnf;
  for (int i = 0; i < 64; ++i) cnf.clauses.push_back(Clause{{Literal{{"a"}, "a"}}});
  CHECK_THROWS_AS(nld_decode(lm, {}, cnf, DecoderConfig{}), std::invalid_argument);
}
