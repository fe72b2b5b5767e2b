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

#include "relconstrain/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace relconstrain {

namespace {

// Bit-level deterministic RNG: identical streams on every platform, unlike
// the std <random> distributions.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr double kPi = 3.14159265358979323846;
constexpr double kEmbeddingSd = 0.1;

// Box-Muller, one Gaussian per uniform pair.
std::vector<double> gaussian_stream(std::uint64_t key, int n, double sd) {
  SplitMix64 rng{key};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u1 = 1.0 - rng.uniform();  // (0, 1]
    const double u2 = rng.uniform();
    out[static_cast<std::size_t>(i)] = sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
  return out;
}

std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) {
  SplitMix64 rng{a ^ (b + 0x9E3779B97F4A7C15ULL)};
  return rng.next();
}

Embedding mean_vector(const EmbeddingSeq& seq, int dim) {
  Embedding m(static_cast<std::size_t>(dim), 0.0);
  if (seq.empty()) return m;
  for (const auto& v : seq) {
    if (static_cast<int>(v.size()) != dim)
      throw std::invalid_argument("embedding dimension mismatch");
    for (int j = 0; j < dim; ++j) m[static_cast<std::size_t>(j)] += v[static_cast<std::size_t>(j)];
  }
  const double inv = 1.0 / static_cast<double>(seq.size());
  for (double& x : m) x *= inv;
  return m;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr const char* kScorerMagic = "RELCONSTRAIN-SCORER";
constexpr const char* kScorerHeader = "RELCONSTRAIN-SCORER v1";

[[noreturn]] void malformed_scorer(const std::string& detail) {
  throw std::runtime_error("malformed scorer file: " + detail);
}

}  // namespace

Embedding seeded_embedding(const std::string& surface, int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("embedding dim must be >= 1");
  return gaussian_stream(mix_keys(seed, fnv1a(surface)), dim, kEmbeddingSd);
}

EmbeddingTable::EmbeddingTable(const Vocabulary& vocab, int dim, std::uint64_t seed,
                               const std::unordered_map<std::string, Embedding>& overrides)
    : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("embedding dim must be >= 1");
  vectors_.reserve(static_cast<std::size_t>(vocab.size()));
  for (int id = 0; id < vocab.size(); ++id) {
    const std::string& s = vocab.surface(id);
    if (auto it = overrides.find(s); it != overrides.end()) {
      if (static_cast<int>(it->second.size()) != dim)
        throw std::invalid_argument("override embedding dimension mismatch for '" + s + "'");
      vectors_.push_back(it->second);
    } else {
      vectors_.push_back(seeded_embedding(s, dim, seed));
    }
  }
}

const Embedding& EmbeddingTable::vector(int id) const {
  if (id < 0 || id >= static_cast<int>(vectors_.size()))
    throw std::out_of_range("token id out of range");
  return vectors_[static_cast<std::size_t>(id)];
}

EmbeddingSeq EmbeddingTable::embed(const std::vector<int>& ids) const {
  EmbeddingSeq seq;
  seq.reserve(ids.size());
  for (int id : ids) seq.push_back(vector(id));
  return seq;
}

BilinearScorer::BilinearScorer(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("scorer dim must be >= 1");
  const std::vector<double> flat =
      gaussian_stream(mix_keys(seed, fnv1a("bilinear-weight")), dim * dim, kEmbeddingSd);
  weight_.assign(static_cast<std::size_t>(dim), std::vector<double>(static_cast<std::size_t>(dim)));
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      weight_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          flat[static_cast<std::size_t>(i * dim + j)];
}

BilinearScorer::BilinearScorer(std::vector<std::vector<double>> weight) : weight_(std::move(weight)) {
  if (weight_.empty()) throw std::invalid_argument("scorer weight must be non-empty");
  for (const auto& row : weight_)
    if (row.size() != weight_.size()) throw std::invalid_argument("scorer weight must be square");
}

double BilinearScorer::forward(const EmbeddingSeq& query, const EmbeddingSeq& doc) const {
  const int d = dim();
  const Embedding qm = mean_vector(query, d);
  const Embedding dm = mean_vector(doc, d);
  double f = 0.0;
  for (int i = 0; i < d; ++i) {
    double row = 0.0;
    for (int j = 0; j < d; ++j)
      row += weight_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
             dm[static_cast<std::size_t>(j)];
    f += qm[static_cast<std::size_t>(i)] * row;
  }
  return f;
}

EmbeddingSeq BilinearScorer::grad_doc(const EmbeddingSeq& query, const EmbeddingSeq& doc) const {
  const int d = dim();
  if (doc.empty()) return {};
  const Embedding qm = mean_vector(query, d);
  // d f / d doc[i] = W^T mean(query) / n_doc, shared by all i.
  Embedding g(static_cast<std::size_t>(d), 0.0);
  for (int j = 0; j < d; ++j) {
    double col = 0.0;
    for (int i = 0; i < d; ++i)
      col += weight_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
             qm[static_cast<std::size_t>(i)];
    g[static_cast<std::size_t>(j)] = col / static_cast<double>(doc.size());
  }
  for (const auto& v : doc)
    if (static_cast<int>(v.size()) != d) throw std::invalid_argument("embedding dimension mismatch");
  return EmbeddingSeq(doc.size(), g);
}

double SigmoidScorer::forward(const EmbeddingSeq& query, const EmbeddingSeq& doc) const {
  return sigmoid(inner_.forward(query, doc));
}

EmbeddingSeq SigmoidScorer::grad_doc(const EmbeddingSeq& query, const EmbeddingSeq& doc) const {
  const double s = sigmoid(inner_.forward(query, doc));
  const double scale = s * (1.0 - s);
  EmbeddingSeq g = inner_.grad_doc(query, doc);
  for (auto& v : g)
    for (double& x : v) x *= scale;
  return g;
}

double loss_from_logit(double f_value) {
  // -ln(sigmoid(f)) = softplus(-f), kept stable for large |f|.
  const double x = -f_value;
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

std::vector<double> integrad_all(const DifferentiableScorer& scorer, const EmbeddingSeq& query,
                                 const EmbeddingSeq& doc, int steps) {
  if (steps < 1) throw std::invalid_argument("integrad steps must be >= 1");
  const std::size_t n = doc.size();
  std::vector<double> acc(n, 0.0);
  EmbeddingSeq scaled = doc;
  for (int k = 1; k <= steps; ++k) {
    const double alpha = static_cast<double>(k) / static_cast<double>(steps);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < doc[i].size(); ++j) scaled[i][j] = alpha * doc[i][j];
    const EmbeddingSeq grads = scorer.grad_doc(query, scaled);
    if (grads.size() != n) throw std::runtime_error("scorer returned wrong gradient count");
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < doc[i].size(); ++j) dot += doc[i][j] * grads[i][j];
      acc[i] += dot;
    }
  }
  for (double& a : acc) a /= static_cast<double>(steps);
  return acc;
}

double integrad(const DifferentiableScorer& scorer, const EmbeddingSeq& query,
                const EmbeddingSeq& doc, int token_index, int steps) {
  if (token_index < 0 || token_index >= static_cast<int>(doc.size()))
    throw std::out_of_range("token index out of range");
  return integrad_all(scorer, query, doc, steps)[static_cast<std::size_t>(token_index)];
}

std::vector<double> normalize_saliency(const std::vector<double>& raw) {
  if (raw.empty()) throw std::invalid_argument("cannot normalize empty saliency");
  double denom = 0.0;
  for (double g : raw) denom += std::abs(g);
  std::vector<double> out(raw.size(), 0.0);
  if (denom == 0.0) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / denom;
  return out;
}

SaliencyVector compute_saliency(const DifferentiableScorer& scorer, const EmbeddingSeq& query,
                                const EmbeddingSeq& doc, std::vector<std::string> surfaces,
                                int steps) {
  if (surfaces.size() != doc.size())
    throw std::invalid_argument("surface/embedding count mismatch");
  SaliencyVector sv;
  sv.surfaces = std::move(surfaces);
  if (doc.empty()) return sv;
  sv.raw = integrad_all(scorer, query, doc, steps);
  sv.normalized = normalize_saliency(sv.raw);
  return sv;
}

std::vector<std::string> select_constraint_tokens(const SaliencyVector& saliency,
                                                  const StopList& stops, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  struct Occurrence {
    double raw;
    std::size_t pos;
  };
  // Best occurrence per distinct content surface; ties keep the earlier one.
  std::unordered_map<std::string, Occurrence> best;
  for (std::size_t i = 0; i < saliency.surfaces.size(); ++i) {
    const std::string& s = saliency.surfaces[i];
    if (!is_content_token(s, stops)) continue;
    const double g = saliency.raw[i];
    auto [it, inserted] = best.try_emplace(s, Occurrence{g, i});
    if (!inserted && g > it->second.raw) it->second = Occurrence{g, i};
  }
  std::vector<std::pair<std::string, Occurrence>> ranked(best.begin(), best.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.raw != b.second.raw) return a.second.raw > b.second.raw;
    return a.second.pos < b.second.pos;
  });
  std::vector<std::string> out;
  for (const auto& [surface, occ] : ranked) {
    if (static_cast<int>(out.size()) == k) break;
    out.push_back(surface);
  }
  return out;
}

ScorerSpec ScorerSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scorer file: " + path);
  std::string line;
  if (!std::getline(in, line)) malformed_scorer("empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kScorerHeader) {
    if (line.rfind(kScorerMagic, 0) == 0) throw std::runtime_error("unsupported version: " + line);
    malformed_scorer("bad header");
  }

  ScorerSpec spec;
  unsigned long long seed = 0;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "dim=%d", &spec.dim) != 1 || spec.dim < 1)
    malformed_scorer("bad dim line");
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "seed=%llu", &seed) != 1)
    malformed_scorer("bad seed line");
  spec.seed = seed;

  std::vector<std::vector<double>> weight_rows;
  bool has_weight = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "E") {
      std::string surface;
      if (!(ls >> surface)) malformed_scorer("bad embedding line: " + line);
      Embedding v;
      double x = 0.0;
      while (ls >> x) v.push_back(x);
      if (static_cast<int>(v.size()) != spec.dim) malformed_scorer("bad embedding line: " + line);
      spec.embeddings[surface] = std::move(v);
    } else if (tag == "W") {
      if (!has_weight) {
        weight_rows.assign(static_cast<std::size_t>(spec.dim),
                           std::vector<double>(static_cast<std::size_t>(spec.dim), 0.0));
        has_weight = true;
      }
      int row = -1;
      if (!(ls >> row) || row < 0 || row >= spec.dim) malformed_scorer("bad weight line: " + line);
      std::vector<double> v;
      double x = 0.0;
      while (ls >> x) v.push_back(x);
      if (static_cast<int>(v.size()) != spec.dim) malformed_scorer("bad weight line: " + line);
      weight_rows[static_cast<std::size_t>(row)] = std::move(v);
    } else {
      malformed_scorer("unknown record: " + line);
    }
  }
  if (has_weight) spec.weight = std::move(weight_rows);
  return spec;
}

void ScorerSpec::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open scorer file for writing: " + path);
  out << kScorerHeader << "\n";
  out << "dim=" << dim << "\n";
  out << "seed=" << seed << "\n";
  std::vector<std::string> keys;
  keys.reserve(embeddings.size());
  for (const auto& [surface, v] : embeddings) keys.push_back(surface);
  std::sort(keys.begin(), keys.end());
  for (const auto& surface : keys) {
    out << "E " << surface;
    for (double x : embeddings.at(surface)) out << " " << format_double(x);
    out << "\n";
  }
  if (weight) {
    for (std::size_t r = 0; r < weight->size(); ++r) {
      out << "W " << r;
      for (double x : (*weight)[r]) out << " " << format_double(x);
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("failed writing scorer file: " + path);
}

BilinearScorer ScorerSpec::make_scorer() const {
  if (weight) return BilinearScorer(*weight);
  return BilinearScorer(dim, seed);
}

EmbeddingTable ScorerSpec::make_table(const Vocabulary& vocab) const {
  return EmbeddingTable(vocab, dim, seed, embeddings);
}

}  // namespace relconstrain
