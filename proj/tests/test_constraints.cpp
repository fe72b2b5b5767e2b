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

#include <cstdio>
#include <fstream>

#include "oracles.hpp"
#include "relconstrain/constraints.hpp"

using namespace relconstrain;

namespace {

MorphologyTable sample_table() {
  MorphologyTable t;
  t.add("private", {"privates", "privately", "privatize", "privatized", "privatization"});
  t.add("health", {"healthy", "healthier"});
  return t;
}

ConstraintTracker advance_seq(const Cnf& cnf, const std::vector<std::string>& seq) {
  ConstraintTracker t = ConstraintTracker::start(cnf);
  std::vector<std::string> history;
  for (const auto& tok : seq) {
    t = advance(t, cnf, history, tok);
    history.push_back(tok);
  }
  return t;
}

}  // namespace

TEST_CASE("word form expansion") {
  const MorphologyTable table = sample_table();
  const auto private_forms = expand_word_forms("private", table);
  CHECK(private_forms.count("private") == 1);
  CHECK(private_forms.count("privatization") == 1);

  // Rules only: no table entry for "standard".
  const auto standard_forms = expand_word_forms("standard", MorphologyTable{});
  CHECK(standard_forms.count("standard") == 1);
  CHECK(standard_forms.count("standards") == 1);

  CHECK(expand_word_forms("x1", MorphologyTable{}).count("x1") == 1);

  // Final 'e' is stripped before ed/ing.
  const auto time_forms = expand_word_forms("time", MorphologyTable{});
  CHECK(time_forms.count("timing") == 1);
  CHECK(time_forms.count("timed") == 1);
}

TEST_CASE("cnf construction") {
  const MorphologyTable table = sample_table();
  const Cnf cnf = build_cnf({"private", "health", "standard"}, table);
  REQUIRE(cnf.clauses.size() == 3);
  CHECK(clause_satisfied(cnf.clauses[0], {"privatization"}));
  CHECK(clause_satisfied(cnf.clauses[1], {"healthy"}));
  CHECK(clause_satisfied(cnf.clauses[2], {"standards"}));
  CHECK_FALSE(clause_satisfied(cnf.clauses[0], {"health"}));
  for (const auto& clause : cnf.clauses)
    for (const auto& literal : clause.literals) CHECK_FALSE(literal.tokens.empty());
  // The lemma is the first literal of its clause.
  CHECK(cnf.clauses[0].literals[0].tokens == std::vector<std::string>{"private"});
  CHECK(cnf.clauses[0].literals[0].source_lemma == "private");

  CHECK(build_cnf({}, table).empty());

  const Cnf multi = build_cnf({"apple tree"}, MorphologyTable{});
  REQUIRE(multi.clauses.size() == 1);
  CHECK(multi.clauses[0].literals[0].tokens == std::vector<std::string>{"apple", "tree"});
}

TEST_CASE("partial match progress on the apple tree literal") {
  Cnf cnf;
  cnf.clauses.push_back(Clause{{Literal{{"apple", "tree"}, "apple tree"}}});

  ConstraintTracker t = advance_seq(cnf, {"i", "saw", "an", "apple"});
  CHECK(t.progress(0, 0) == 1);
  CHECK(max_partial_ratio(t, cnf) == 0.5);
  CHECK_FALSE(t.clause_satisfied(0));

  SUBCASE("completing the literal satisfies the clause forever") {
    t = advance(t, cnf, std::vector<std::string>{"i", "saw", "an", "apple"}, "tree");
    CHECK(t.clause_satisfied(0));
    CHECK(max_partial_ratio(t, cnf) == 0.0);  // no unsatisfied clause left
    t = advance(t, cnf, std::vector<std::string>{"apple", "tree"}, "oak");
    CHECK(t.clause_satisfied(0));  // irreversible
  }

  SUBCASE("a mismatching token resets the progress") {
    t = advance(t, cnf, std::vector<std::string>{"i", "saw", "an", "apple"}, "oak");
    CHECK(t.progress(0, 0) == 0);
    CHECK(max_partial_ratio(t, cnf) == 0.0);
  }

  SUBCASE("a literal-initial token restarts progress immediately") {
    t = advance(t, cnf, std::vector<std::string>{"i", "saw", "an", "apple"}, "apple");
    CHECK(t.progress(0, 0) == 1);
    CHECK(max_partial_ratio(t, cnf) == 0.5);
  }
}

TEST_CASE("max partial ratio picks the best unsatisfied clause") {
  Cnf cnf;
  cnf.clauses.push_back(Clause{{Literal{{"apple", "tree"}, "apple tree"}}});
  cnf.clauses.push_back(Clause{{Literal{{"north", "star"}, "north star"}}});
  const ConstraintTracker t = advance_seq(cnf, {"apple"});
  CHECK(max_partial_ratio(t, cnf) == 0.5);  // ratios {0.5, 0.0}

  CHECK(max_partial_ratio(ConstraintTracker::start(Cnf{}), Cnf{}) == 0.0);

  Cnf one;
  one.clauses.push_back(Clause{{Literal{{"a"}, "a"}}});
  const ConstraintTracker done = advance_seq(one, {"a"});
  CHECK(done.all_satisfied(one));
  CHECK(max_partial_ratio(done, one) == 0.0);
}

TEST_CASE("tracker equals a full re-scan on random instances") {
  testoracle::Rng rng(43);
  const std::vector<std::string> alphabet = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 300; ++trial) {
    const Cnf cnf = testoracle::random_cnf(rng, alphabet, 3, 3, 3);
    ConstraintTracker t = ConstraintTracker::start(cnf);
    std::vector<std::string> seq;
    std::uint64_t prev_mask = 0;
    for (int step = 0; step < 20; ++step) {
      const std::string next = rng.pick(alphabet);
      t = advance(t, cnf, seq, next);
      seq.push_back(next);
      const testoracle::TrackerState expected = testoracle::rescan_tracker(cnf, seq);
      REQUIRE(t.satisfied_mask() == expected.mask);
      for (std::size_t c = 0; c < cnf.clauses.size(); ++c)
        for (std::size_t l = 0; l < cnf.clauses[c].literals.size(); ++l)
          REQUIRE(t.progress(static_cast<int>(c), static_cast<int>(l)) == expected.progress[c][l]);
      // Monotonicity: satisfied clauses never un-satisfy.
      REQUIRE((t.satisfied_mask() & prev_mask) == prev_mask);
      prev_mask = t.satisfied_mask();
      const double ratio = max_partial_ratio(t, cnf);
      REQUIRE(ratio >= 0.0);
      REQUIRE(ratio < 1.0);  // a full match flips the clause in the same step
    }
  }
}

TEST_CASE("advance sees only the needed window") {
  Cnf cnf;
  cnf.clauses.push_back(Clause{{Literal{{"a", "b", "c"}, "a b c"}}});
  // Full history vs. only the last max_literal_len-1 tokens.
  const std::vector<std::string> full = {"x", "y", "a", "b"};
  const std::vector<std::string> window = {"a", "b"};
  ConstraintTracker t0 = advance_seq(cnf, full);
  const auto with_full = advance(t0, cnf, full, "c");
  const auto with_window = advance(t0, cnf, window, "c");
  CHECK(with_full.satisfied_mask() == with_window.satisfied_mask());
  CHECK(with_full.progress(0, 0) == with_window.progress(0, 0));
}

TEST_CASE("full sequence satisfaction scan") {
  Cnf cnf;
  cnf.clauses.push_back(Clause{{Literal{{"apple", "tree"}, "apple tree"}, Literal{{"oak"}, "oak"}}});
  CHECK(cnf_satisfied(cnf, {"an", "oak", "stood"}));
  CHECK(cnf_satisfied(cnf, {"the", "apple", "tree", "fell"}));
  CHECK_FALSE(cnf_satisfied(cnf, {"the", "apple", "fell"}));
  CHECK(cnf_satisfied(Cnf{}, {}));  // vacuous
}

TEST_CASE("morphology table file parsing") {
  const std::string path = "test_morph.tsv";
  {
    std::ofstream out(path);
    out << "# lemma<TAB>forms\n";
    out << "private\tprivates,privatization\n";
    out << "run\tran,running\n";
  }
  const MorphologyTable table = MorphologyTable::from_file(path);
  REQUIRE(table.forms("private") != nullptr);
  CHECK(table.forms("private")->count("private") == 1);  // lemma always included
  CHECK(table.forms("private")->count("privatization") == 1);
  CHECK(table.forms("run")->count("ran") == 1);
  CHECK(table.forms("missing") == nullptr);
  std::remove(path.c_str());

  {
    std::ofstream out(path);
    out << "no-tab-here\n";
  }
  CHECK_THROWS_AS(MorphologyTable::from_file(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("cnf debug format round trips") {
  const MorphologyTable table = sample_table();
  const Cnf cnf = build_cnf({"private", "apple tree"}, table);
  const std::string text = format_cnf(cnf);
  const Cnf parsed = parse_cnf_string(text);
  REQUIRE(parsed.clauses.size() == cnf.clauses.size());
  for (std::size_t c = 0; c < cnf.clauses.size(); ++c) {
    REQUIRE(parsed.clauses[c].literals.size() == cnf.clauses[c].literals.size());
    for (std::size_t l = 0; l < cnf.clauses[c].literals.size(); ++l)
      CHECK(parsed.clauses[c].literals[l].tokens == cnf.clauses[c].literals[l].tokens);
  }
  CHECK_THROWS_AS(parse_cnf_string("a||b\n"), std::runtime_error);
}
