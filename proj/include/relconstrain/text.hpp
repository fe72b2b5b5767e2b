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
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace relconstrain {

// Word-level whitespace tokenizer. Lowercases ASCII letters, splits off
// leading and trailing punctuation characters as single-character tokens,
// and keeps intra-word punctuation ("health-care" stays one token).
// Deterministic; empty input yields an empty list.
std::vector<std::string> tokenize(const std::string& text);

// Integer-indexed token space with dense ids in [0, size()). The special
// surfaces <bos>, <eos> and <unk> always occupy ids 0, 1 and 2.
class Vocabulary {
 public:
  static constexpr int kBosId = 0;
  static constexpr int kEosId = 1;
  static constexpr int kUnkId = 2;
  static constexpr const char* kBosSurface = "<bos>";
  static constexpr const char* kEosSurface = "<eos>";
  static constexpr const char* kUnkSurface = "<unk>";

  // Builds from tokenized sentences; surfaces are added in first-seen order
  // after the specials. Throws std::invalid_argument("empty corpus") when
  // the corpus contains no sentences (a corpus of empty sentences is fine).
  static Vocabulary from_corpus(const std::vector<std::vector<std::string>>& corpus);

  // Reconstructs from an explicit id-ordered surface list (e.g. a model
  // file). The list must start with the three specials, and surfaces must be
  // unique, non-empty and whitespace-free.
  explicit Vocabulary(std::vector<std::string> surfaces);

  int size() const { return static_cast<int>(surfaces_.size()); }
  bool contains(const std::string& surface) const { return index_.count(surface) > 0; }

  // Id of a surface; unknown surfaces map to kUnkId.
  int id(const std::string& surface) const;

  // Surface for an id. Throws std::out_of_range for ids outside [0, size()).
  const std::string& surface(int id) const;

  std::vector<int> encode(const std::vector<std::string>& surfaces) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  const std::vector<std::string>& surfaces() const { return surfaces_; }

 private:
  Vocabulary() = default;

  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, int> index_;
};

// Stopword and punctuation classification for constraint-token filtering.
struct StopList {
  std::unordered_set<std::string> stopwords;
  std::unordered_set<char> punctuation;

  // Built-in English list (~150 entries) plus ASCII punctuation.
  static StopList default_english();

  // Stopwords from a text file: one lowercase surface per line, blank lines
  // and '#'-prefixed comment lines ignored. Punctuation keeps the default
  // ASCII set.
  static StopList from_file(const std::string& path);
};

// False iff the surface is a stopword or consists only of punctuation
// characters. Expects a lowercase surface.
bool is_content_token(const std::string& surface, const StopList& stops);

}  // namespace relconstrain
