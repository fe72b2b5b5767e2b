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

#include "relconstrain/text.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

namespace relconstrain {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string ascii_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool has_whitespace(const std::string& s) {
  for (char c : s)
    if (is_space(c)) return true;
  return false;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < n && !is_space(text[j])) ++j;
    if (i == j) break;
    const std::string chunk = ascii_lower(text.substr(i, j - i));
    // Edge punctuation becomes single-char tokens; the core keeps internal
    // punctuation ("health-care").
    std::size_t b = 0, e = chunk.size();
    while (b < e && is_punct(chunk[b])) ++b;
    while (e > b && is_punct(chunk[e - 1])) --e;
    for (std::size_t p = 0; p < b; ++p) out.emplace_back(1, chunk[p]);
    if (b < e) out.push_back(chunk.substr(b, e - b));
    for (std::size_t p = e; p < chunk.size(); ++p) out.emplace_back(1, chunk[p]);
    i = j;
  }
  return out;
}

Vocabulary Vocabulary::from_corpus(const std::vector<std::vector<std::string>>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  Vocabulary v;
  v.surfaces_ = {kBosSurface, kEosSurface, kUnkSurface};
  for (int i = 0; i < 3; ++i) v.index_[v.surfaces_[i]] = i;
  for (const auto& sentence : corpus) {
    for (const auto& surface : sentence) {
      if (surface.empty() || has_whitespace(surface))
        throw std::invalid_argument("invalid token surface: '" + surface + "'");
      if (v.index_.emplace(surface, static_cast<int>(v.surfaces_.size())).second)
        v.surfaces_.push_back(surface);
    }
  }
  return v;
}

Vocabulary::Vocabulary(std::vector<std::string> surfaces) {
  if (surfaces.size() < 3 || surfaces[0] != kBosSurface || surfaces[1] != kEosSurface ||
      surfaces[2] != kUnkSurface)
    throw std::invalid_argument("vocabulary must start with <bos>, <eos>, <unk>");
  surfaces_ = std::move(surfaces);
  index_.reserve(surfaces_.size());
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    const std::string& s = surfaces_[i];
    if (s.empty() || has_whitespace(s))
      throw std::invalid_argument("invalid token surface: '" + s + "'");
    if (!index_.emplace(s, static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate surface: '" + s + "'");
  }
}

int Vocabulary::id(const std::string& surface) const {
  auto it = index_.find(surface);
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::surface(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("token id out of range");
  return surfaces_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& surfaces) const {
  std::vector<int> ids;
  ids.reserve(surfaces.size());
  for (const auto& s : surfaces) ids.push_back(id(s));
  return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(surface(i));
  return out;
}

namespace {

// ~150 common English stopwords; overridable with StopList::from_file.
const char* const kDefaultStopwords[] = {
    "a",       "about",   "above",  "after",  "again",   "against", "all",     "am",
    "an",      "and",     "any",    "are",    "as",      "at",      "be",      "because",
    "been",    "before",  "being",  "below",  "between", "both",    "but",     "by",
    "can",     "cannot",  "could",  "did",    "do",      "does",    "doing",   "down",
    "during",  "each",    "few",    "for",    "from",    "further", "had",     "has",
    "have",    "having",  "he",     "her",    "here",    "hers",    "herself", "him",
    "himself", "his",     "how",    "i",      "if",      "in",      "into",    "is",
    "it",      "its",     "itself", "just",   "may",     "me",      "might",   "more",
    "most",    "must",    "my",     "myself", "no",      "nor",     "not",     "now",
    "of",      "off",     "often",  "on",     "once",    "only",    "or",      "other",
    "ought",   "our",     "ours",   "out",    "over",    "own",     "same",    "shall",
    "she",     "should",  "so",     "some",   "such",    "than",    "that",    "the",
    "their",   "theirs",  "them",   "themselves", "then", "there",  "these",   "they",
    "this",    "those",   "through", "to",    "too",     "under",   "until",   "up",
    "upon",    "us",      "very",   "was",    "we",      "were",    "what",    "when",
    "where",   "which",   "while",  "who",    "whom",    "why",     "will",    "with",
    "within",  "without", "would",  "you",    "your",    "yours",   "yourself", "yourselves",
    "also",    "although", "among",  "anyone", "become",  "becomes", "came",    "come",
    "get",     "gets",    "got",    "however", "like",    "made",    "make",
    "many",    "much",    "onto",   "rather", "said",    "says",    "still",   "thus",
    "toward",  "via",     "yet",
};

std::unordered_set<char> ascii_punctuation() {
  std::unordered_set<char> p;
  for (int c = 33; c < 127; ++c)
    if (is_punct(static_cast<char>(c))) p.insert(static_cast<char>(c));
  return p;
}

}  // namespace

StopList StopList::default_english() {
  StopList s;
  for (const char* w : kDefaultStopwords) s.stopwords.insert(w);
  s.punctuation = ascii_punctuation();
  return s;
}

StopList StopList::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stopword file: " + path);
  StopList s;
  s.punctuation = ascii_punctuation();
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    s.stopwords.insert(line);
  }
  return s;
}

bool is_content_token(const std::string& surface, const StopList& stops) {
  if (surface.empty()) return false;
  if (stops.stopwords.count(surface)) return false;
  bool all_punct = true;
  for (char c : surface) {
    if (!stops.punctuation.count(c)) {
      all_punct = false;
      break;
    }
  }
  return !all_punct;
}

}  // namespace relconstrain
