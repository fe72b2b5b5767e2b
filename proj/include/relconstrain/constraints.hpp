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
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace relconstrain {

// One positive lexical constraint: a non-empty lowercase token sequence
// whose contiguous appearance in the output satisfies it.
struct Literal {
  std::vector<std::string> tokens;
  std::string source_lemma;  // surface this literal was expanded from
};

// Disjunction of literals; satisfied once any literal fully appears.
struct Clause {
  std::vector<Literal> literals;
};

// Conjunction of clauses. Empty is valid and means "no constraints".
struct Cnf {
  std::vector<Clause> clauses;

  bool empty() const { return clauses.empty(); }
  std::size_t size() const { return clauses.size(); }
  // Longest literal, in tokens; 0 for an empty CNF.
  std::size_t max_literal_len() const;
};

// lemma -> alternative surface forms. Loaded sets always contain the lemma.
class MorphologyTable {
 public:
  MorphologyTable() = default;

  // TSV: lemma<TAB>form1,form2,...  Blank lines and '#' comments ignored.
  static MorphologyTable from_file(const std::string& path);

  void add(const std::string& lemma, const std::vector<std::string>& forms);
  // nullptr when the lemma has no entry.
  const std::set<std::string>* forms(const std::string& lemma) const;
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, std::set<std::string>> table_;
};

// Table lookup plus crude inflection rules (append s/es/ed/ing, dropping a
// final 'e' before ed/ing), always including the lemma itself. Expects a
// lowercase lemma.
std::set<std::string> expand_word_forms(const std::string& lemma, const MorphologyTable& morph);

// One clause per input token; clause literals are the token's expanded word
// forms, each tokenized (a multi-word form becomes a multi-token literal).
// An empty token list yields an empty CNF.
Cnf build_cnf(const std::vector<std::string>& tokens, const MorphologyTable& morph);

// Per-candidate satisfaction state: the set of irreversibly satisfied
// clauses plus, per literal, how many of its leading tokens the generation
// currently ends with. Small value type, copied per beam candidate.
class ConstraintTracker {
 public:
  ConstraintTracker() = default;
  static ConstraintTracker start(const Cnf& cnf);

  std::uint64_t satisfied_mask() const { return satisfied_; }
  bool clause_satisfied(int clause) const { return (satisfied_ >> clause) & 1; }
  int satisfied_count() const;
  bool all_satisfied(const Cnf& cnf) const;
  int progress(int clause, int literal) const { return progress_[clause][literal]; }

 private:
  friend ConstraintTracker advance(const ConstraintTracker&, const Cnf&,
                                   std::span<const std::string>, const std::string&);

  std::uint64_t satisfied_ = 0;                // clause bit set, never cleared
  std::vector<std::vector<int>> progress_;     // [clause][literal] matched prefix length
};

// Advances one generation step. `window` is the tail of the generation
// before `next` — at least max_literal_len-1 tokens when that many exist.
// After the call, each literal's progress is the longest literal prefix that
// is a suffix of (window + next); a literal reaching full length flips its
// clause to satisfied permanently.
ConstraintTracker advance(const ConstraintTracker& tracker, const Cnf& cnf,
                          std::span<const std::string> window, const std::string& next);

// max over unsatisfied clauses, over their literals, of progress/|literal|.
// 0 when every clause is satisfied or the CNF is empty.
double max_partial_ratio(const ConstraintTracker& tracker, const Cnf& cnf);

// Direct full-sequence scans, independent of the tracker.
bool clause_satisfied(const Clause& clause, const std::vector<std::string>& seq);
bool cnf_satisfied(const Cnf& cnf, const std::vector<std::string>& seq);

// Debug text format: one clause per line, literals '|'-separated, literal
// tokens space-joined.
std::string format_cnf(const Cnf& cnf);
Cnf parse_cnf(std::istream& in);
Cnf parse_cnf_string(const std::string& text);

}  // namespace relconstrain
