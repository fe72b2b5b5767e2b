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

#include "relconstrain/constraints.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "relconstrain/text.hpp"

namespace relconstrain {

std::size_t Cnf::max_literal_len() const {
  std::size_t longest = 0;
  for (const auto& clause : clauses)
    for (const auto& literal : clause.literals) longest = std::max(longest, literal.tokens.size());
  return longest;
}

MorphologyTable MorphologyTable::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open morphology file: " + path);
  MorphologyTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw std::runtime_error("malformed morphology line " + std::to_string(lineno));
    const std::string lemma = line.substr(0, tab);
    std::vector<std::string> forms;
    std::string field;
    std::istringstream rest(line.substr(tab + 1));
    while (std::getline(rest, field, ','))
      if (!field.empty()) forms.push_back(field);
    table.add(lemma, forms);
  }
  return table;
}

void MorphologyTable::add(const std::string& lemma, const std::vector<std::string>& forms) {
  auto& set = table_[lemma];
  set.insert(lemma);  // the lemma is always one of its own forms
  set.insert(forms.begin(), forms.end());
}

const std::set<std::string>* MorphologyTable::forms(const std::string& lemma) const {
  auto it = table_.find(lemma);
  return it == table_.end() ? nullptr : &it->second;
}

std::set<std::string> expand_word_forms(const std::string& lemma, const MorphologyTable& morph) {
  std::set<std::string> out{lemma};
  if (const auto* table_forms = morph.forms(lemma)) out.insert(table_forms->begin(), table_forms->end());
  // Rule fallback: s/es plus ed/ing with a final 'e' dropped first.
  out.insert(lemma + "s");
  out.insert(lemma + "es");
  std::string stem = lemma;
  if (!stem.empty() && stem.back() == 'e') stem.pop_back();
  out.insert(stem + "ed");
  out.insert(stem + "ing");
  return out;
}

Cnf build_cnf(const std::vector<std::string>& tokens, const MorphologyTable& morph) {
  Cnf cnf;
  for (const auto& lemma : tokens) {
    Clause clause;
    std::set<std::vector<std::string>> seen;
    auto add_literal = [&](const std::string& form) {
      std::vector<std::string> literal_tokens = tokenize(form);
      if (literal_tokens.empty()) return;
      if (!seen.insert(literal_tokens).second) return;  // no duplicate literals
      clause.literals.push_back(Literal{std::move(literal_tokens), lemma});
    };
    add_literal(lemma);  // lemma first, remaining forms in sorted order
    for (const auto& form : expand_word_forms(lemma, morph)) add_literal(form);
    if (!clause.literals.empty()) cnf.clauses.push_back(std::move(clause));
  }
  return cnf;
}

ConstraintTracker ConstraintTracker::start(const Cnf& cnf) {
  ConstraintTracker t;
  t.progress_.reserve(cnf.clauses.size());
  for (const auto& clause : cnf.clauses)
    t.progress_.emplace_back(clause.literals.size(), 0);
  return t;
}

int ConstraintTracker::satisfied_count() const { return std::popcount(satisfied_); }

bool ConstraintTracker::all_satisfied(const Cnf& cnf) const {
  return satisfied_count() == static_cast<int>(cnf.clauses.size());
}

ConstraintTracker advance(const ConstraintTracker& tracker, const Cnf& cnf,
                          std::span<const std::string> window, const std::string& next) {
  ConstraintTracker out = tracker;
  for (std::size_t c = 0; c < cnf.clauses.size(); ++c) {
    const Clause& clause = cnf.clauses[c];
    for (std::size_t l = 0; l < clause.literals.size(); ++l) {
      const auto& toks = clause.literals[l].tokens;
      // Longest literal prefix that is a suffix of (window + next).
      const int limit = static_cast<int>(std::min(toks.size(), window.size() + 1));
      int matched = 0;
      for (int p = limit; p >= 1; --p) {
        if (toks[static_cast<std::size_t>(p - 1)] != next) continue;
        bool ok = true;
        for (int q = 0; q + 1 < p; ++q) {
          if (window[window.size() - static_cast<std::size_t>(p - 1) + static_cast<std::size_t>(q)] !=
              toks[static_cast<std::size_t>(q)]) {
            ok = false;
            break;
          }
        }
        if (ok) {
          matched = p;
          break;
        }
      }
      out.progress_[c][l] = matched;
      if (matched == static_cast<int>(toks.size()))
        out.satisfied_ |= (std::uint64_t{1} << c);  // irreversible
    }
  }
  return out;
}

double max_partial_ratio(const ConstraintTracker& tracker, const Cnf& cnf) {
  double best = 0.0;
  for (std::size_t c = 0; c < cnf.clauses.size(); ++c) {
    if (tracker.clause_satisfied(static_cast<int>(c))) continue;
    const Clause& clause = cnf.clauses[c];
    for (std::size_t l = 0; l < clause.literals.size(); ++l) {
      const double ratio = static_cast<double>(tracker.progress(static_cast<int>(c), static_cast<int>(l))) /
                           static_cast<double>(clause.literals[l].tokens.size());
      best = std::max(best, ratio);
    }
  }
  return best;
}

bool clause_satisfied(const Clause& clause, const std::vector<std::string>& seq) {
  for (const auto& literal : clause.literals) {
    const auto& toks = literal.tokens;
    if (toks.empty() || toks.size() > seq.size()) continue;
    for (std::size_t start = 0; start + toks.size() <= seq.size(); ++start) {
      bool match = true;
      for (std::size_t j = 0; j < toks.size(); ++j) {
        if (seq[start + j] != toks[j]) {
          match = false;
          break;
        }
      }
      if (match) return true;
    }
  }
  return false;
}

bool cnf_satisfied(const Cnf& cnf, const std::vector<std::string>& seq) {
  for (const auto& clause : cnf.clauses)
    if (!clause_satisfied(clause, seq)) return false;
  return true;
}

std::string format_cnf(const Cnf& cnf) {
  std::ostringstream out;
  for (const auto& clause : cnf.clauses) {
    for (std::size_t l = 0; l < clause.literals.size(); ++l) {
      if (l > 0) out << "|";
      const auto& toks = clause.literals[l].tokens;
      for (std::size_t j = 0; j < toks.size(); ++j) {
        if (j > 0) out << " ";
        out << toks[j];
      }
    }
    out << "\n";
  }
  return out.str();
}

Cnf parse_cnf(std::istream& in) {
  Cnf cnf;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Clause clause;
    std::set<std::vector<std::string>> seen;
    std::istringstream ls(line);
    std::string literal_text;
    while (std::getline(ls, literal_text, '|')) {
      std::istringstream ws(literal_text);
      std::vector<std::string> toks;
      std::string tok;
      while (ws >> tok) toks.push_back(tok);
      if (toks.empty()) throw std::runtime_error("empty literal in clause: " + line);
      std::string lemma = toks[0];
      for (std::size_t j = 1; j < toks.size(); ++j) lemma += " " + toks[j];
      if (seen.insert(toks).second) clause.literals.push_back(Literal{std::move(toks), std::move(lemma)});
    }
    if (clause.literals.empty()) throw std::runtime_error("empty clause line");
    cnf.clauses.push_back(std::move(clause));
  }
  return cnf;
}

Cnf parse_cnf_string(const std::string& text) {
  std::istringstream in(text);
  return parse_cnf(in);
}

}  // namespace relconstrain
