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

#include "relconstrain/lm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace relconstrain {

namespace {

constexpr const char* kMagic = "RELCONSTRAIN-LM";
constexpr const char* kHeader = "RELCONSTRAIN-LM v1";

[[noreturn]] void malformed(const std::string& detail) {
  throw std::runtime_error("malformed LM file: " + detail);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

NGramLm NGramLm::train(Vocabulary vocab, const std::vector<std::vector<int>>& corpus, int order,
                       double smoothing_k) {
  if (order < 1) throw std::invalid_argument("n-gram order must be >= 1");
  if (smoothing_k <= 0.0) throw std::invalid_argument("smoothing k must be > 0");
  if (corpus.empty()) throw std::invalid_argument("empty corpus");

  NGramLm lm(std::move(vocab), order, smoothing_k);
  const int vocab_size = lm.vocab_.size();
  for (const auto& sentence : corpus) {
    for (int id : sentence)
      if (id < 0 || id >= vocab_size) throw std::out_of_range("token out of vocabulary");
    // (order-1) <bos> padding plus a closing <eos>.
    std::vector<int> padded(static_cast<std::size_t>(order - 1), Vocabulary::kBosId);
    padded.insert(padded.end(), sentence.begin(), sentence.end());
    padded.push_back(Vocabulary::kEosId);
    for (std::size_t pos = static_cast<std::size_t>(order - 1); pos < padded.size(); ++pos) {
      std::vector<int> ctx(padded.begin() + static_cast<long>(pos) - (order - 1),
                           padded.begin() + static_cast<long>(pos));
      ContextCounts& cc = lm.counts_[ctx];
      ++cc.next[padded[pos]];
      ++cc.total;
    }
  }
  return lm;
}

std::vector<double> NGramLm::next_token_logprobs(const std::vector<int>& prefix) const {
  const int vocab_size = vocab_.size();
  for (int id : prefix)
    if (id < 0 || id >= vocab_size) throw std::out_of_range("token out of vocabulary");

  // Effective context: the last (order-1) ids of (<bos> padding + prefix).
  const int ctx_len = order_ - 1;
  std::vector<int> ctx;
  ctx.reserve(static_cast<std::size_t>(ctx_len));
  const int missing = ctx_len - static_cast<int>(prefix.size());
  for (int i = 0; i < missing; ++i) ctx.push_back(Vocabulary::kBosId);
  const std::size_t take = static_cast<std::size_t>(ctx_len - std::max(missing, 0));
  ctx.insert(ctx.end(), prefix.end() - static_cast<long>(take), prefix.end());

  const ContextCounts* cc = nullptr;
  if (auto it = counts_.find(ctx); it != counts_.end()) cc = &it->second;
  const double total = cc ? static_cast<double>(cc->total) : 0.0;
  const double denom = std::log(total + smoothing_k_ * vocab_size);

  std::vector<double> logprobs(static_cast<std::size_t>(vocab_size));
  for (int v = 0; v < vocab_size; ++v) {
    double count = 0.0;
    if (cc) {
      if (auto it = cc->next.find(v); it != cc->next.end()) count = static_cast<double>(it->second);
    }
    logprobs[static_cast<std::size_t>(v)] = std::log(count + smoothing_k_) - denom;
  }
  return logprobs;
}

void NGramLm::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open LM file for writing: " + path);
  out << kHeader << "\n";
  out << "order=" << order_ << "\n";
  out << "k=" << format_double(smoothing_k_) << "\n";
  for (int i = 0; i < vocab_.size(); ++i) out << "V " << i << " " << vocab_.surface(i) << "\n";
  for (const auto& [ctx, cc] : counts_) {
    for (const auto& [tok, count] : cc.next) {
      out << "C";
      for (int id : ctx) out << " " << id;
      out << " | " << tok << " " << count << "\n";
    }
  }
  if (!out) throw std::runtime_error("failed writing LM file: " + path);
}

NGramLm NGramLm::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open LM file: " + path);

  std::string line;
  if (!std::getline(in, line)) malformed("empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    if (line.rfind(kMagic, 0) == 0) throw std::runtime_error("unsupported version: " + line);
    malformed("bad header");
  }

  int order = 0;
  double k = 0.0;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "order=%d", &order) != 1 || order < 1)
    malformed("bad order line");
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "k=%lf", &k) != 1 || !(k > 0.0))
    malformed("bad k line");

  std::vector<std::string> surfaces;
  std::map<std::vector<int>, ContextCounts> counts;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "V") {
      int id = -1;
      std::string surface;
      if (!(ls >> id >> surface) || id != static_cast<int>(surfaces.size()))
        malformed("bad vocab line: " + line);
      surfaces.push_back(surface);
    } else if (tag == "C") {
      std::vector<int> ctx;
      std::string field;
      bool saw_bar = false;
      long long tok = -1, count = 0;
      while (ls >> field) {
        if (field == "|") {
          saw_bar = true;
          break;
        }
        try {
          ctx.push_back(std::stoi(field));
        } catch (const std::exception&) {
          malformed("bad count line: " + line);
        }
      }
      if (!saw_bar || !(ls >> tok >> count) || count < 1)
        malformed("bad count line: " + line);
      if (static_cast<int>(ctx.size()) != order - 1)
        malformed("context length does not match order: " + line);
      const int vs = static_cast<int>(surfaces.size());
      for (int id : ctx)
        if (id < 0 || id >= vs) malformed("count references unknown id: " + line);
      if (tok < 0 || tok >= vs) malformed("count references unknown id: " + line);
      ContextCounts& cc = counts[ctx];
      cc.next[static_cast<int>(tok)] += count;
      cc.total += count;
    } else {
      malformed("unknown record: " + line);
    }
  }
  if (surfaces.size() < 3) malformed("vocabulary incomplete");

  NGramLm lm(Vocabulary(std::move(surfaces)), order, k);
  lm.counts_ = std::move(counts);
  return lm;
}

}  // namespace relconstrain
