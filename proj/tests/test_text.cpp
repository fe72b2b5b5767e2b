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

#include "relconstrain/text.hpp"

using namespace relconstrain;

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += " ";
    out += tokens[i];
  }
  return out;
}

}  // namespace

TEST_CASE("tokenize basics") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("Private companies.") == std::vector<std::string>{"private", "companies", "."});
  CHECK(tokenize("health-care, now") == std::vector<std::string>{"health-care", ",", "now"});
  CHECK(tokenize("  spaced\tout\n") == std::vector<std::string>{"spaced", "out"});
  CHECK(tokenize("(hello)") == std::vector<std::string>{"(", "hello", ")"});
  CHECK(tokenize("...") == std::vector<std::string>{".", ".", "."});
  CHECK(tokenize("don't stop") == std::vector<std::string>{"don't", "stop"});
}

TEST_CASE("tokenize is idempotent on its own output") {
  const std::vector<std::string> inputs = {
      "Private companies.", "health-care, now", "a--b  (c)", "U.S. males!!", "x", "", "-", "e.g."};
  for (const auto& input : inputs) {
    const auto once = tokenize(input);
    CHECK(tokenize(join(once)) == once);
  }
}

TEST_CASE("vocabulary construction") {
  const auto v = Vocabulary::from_corpus({{"a", "b"}, {"b"}});
  CHECK(v.size() == 5);
  CHECK(v.id("a") == 3);
  CHECK(v.id("b") == 4);
  CHECK(v.surface(Vocabulary::kBosId) == Vocabulary::kBosSurface);
  CHECK(v.surface(Vocabulary::kEosId) == Vocabulary::kEosSurface);
  CHECK(v.surface(Vocabulary::kUnkId) == Vocabulary::kUnkSurface);

  CHECK(Vocabulary::from_corpus({{"a"}}).size() == 4);
  // Degenerate but defined: a corpus of one empty sentence.
  CHECK(Vocabulary::from_corpus({{}}).size() == 3);

  CHECK_THROWS_WITH_AS(Vocabulary::from_corpus({}), "empty corpus", std::invalid_argument);
}

TEST_CASE("encode and decode round trip") {
  const auto v = Vocabulary::from_corpus({{"a", "b", "c"}});
  const std::vector<std::string> seq = {"b", "a", "c", "a"};
  CHECK(v.decode(v.encode(seq)) == seq);
  // Unknown surfaces map to <unk> instead of erroring.
  CHECK(v.encode({"zzz"}) == std::vector<int>{Vocabulary::kUnkId});
  CHECK_THROWS_AS(v.surface(99), std::out_of_range);
  CHECK_THROWS_AS(v.surface(-1), std::out_of_range);
}

TEST_CASE("vocabulary from explicit surface list") {
  const Vocabulary v({"<bos>", "<eos>", "<unk>", "x", "y"});
  CHECK(v.size() == 5);
  CHECK(v.id("y") == 4);
  CHECK_THROWS_AS(Vocabulary({"x"}), std::invalid_argument);
  CHECK_THROWS_AS(Vocabulary({"<bos>", "<eos>", "<unk>", "x", "x"}), std::invalid_argument);
}

TEST_CASE("content token classification") {
  const StopList stops = StopList::default_english();
  CHECK_FALSE(is_content_token("the", stops));
  CHECK_FALSE(is_content_token(".", stops));
  CHECK_FALSE(is_content_token("!!", stops));
  CHECK(is_content_token("privatization", stops));
  CHECK(is_content_token("health-care", stops));  // has non-punctuation chars

  // Exactly one of content / (stopword or punctuation-only) holds.
  for (const std::string& s : {"the", ".", "privatization", "water", "of", "--", "x1"}) {
    const bool content = is_content_token(s, stops);
    bool all_punct = true;
    for (char c : s) all_punct = all_punct && stops.punctuation.count(c) > 0;
    const bool stoppish = stops.stopwords.count(s) > 0 || all_punct;
    CHECK(content != stoppish);
  }
}

TEST_CASE("stopword file loading") {
  const std::string path = "test_stopwords.txt";
  {
    std::ofstream out(path);
    out << "# comment line\n\nfoo\nbar\n";
  }
  const StopList stops = StopList::from_file(path);
  CHECK(stops.stopwords.count("foo") == 1);
  CHECK(stops.stopwords.count("bar") == 1);
  CHECK(stops.stopwords.count("# comment line") == 0);
  CHECK_FALSE(is_content_token("foo", stops));
  CHECK(is_content_token("the", stops));  // custom list replaces the default
  std::remove(path.c_str());

  CHECK_THROWS_AS(StopList::from_file("does_not_exist.txt"), std::runtime_error);
}
