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
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "relconstrain/text.hpp"

namespace relconstrain {

using Embedding = std::vector<double>;
using EmbeddingSeq = std::vector<Embedding>;

// Deterministic Gaussian vector (mean 0, sd 0.1) derived from the surface
// string and a seed, so a token keeps its embedding across vocabularies and
// runs. Uses its own bit-level generator; no std distribution involved.
Embedding seeded_embedding(const std::string& surface, int dim, std::uint64_t seed);

// Static token embeddings for one vocabulary.
class EmbeddingTable {
 public:
  // Vectors default to seeded_embedding of each surface; entries in
  // `overrides` (keyed by surface) replace the seeded value.
  EmbeddingTable(const Vocabulary& vocab, int dim, std::uint64_t seed,
                 const std::unordered_map<std::string, Embedding>& overrides = {});

  int dim() const { return dim_; }
  const Embedding& vector(int id) const;
  EmbeddingSeq embed(const std::vector<int>& ids) const;

 private:
  int dim_;
  std::vector<Embedding> vectors_;  // indexed by id
};

// Differentiable relevance scorer: a scalar logit for a (query, document)
// embedding pair plus the gradient of that logit with respect to each
// document token embedding. Implementations must be pure and immutable.
class DifferentiableScorer {
 public:
  virtual ~DifferentiableScorer() = default;

  virtual double forward(const EmbeddingSeq& query, const EmbeddingSeq& doc) const = 0;

  // d forward / d doc[i], one vector per document token. Must agree with
  // central finite differences of forward.
  virtual EmbeddingSeq grad_doc(const EmbeddingSeq& query, const EmbeddingSeq& doc) const = 0;
};

// f = mean(query)^T W mean(doc). Gradient for doc token i is
// W^T mean(query) / n_doc, identical for every i. An empty side contributes
// a zero mean vector.
class BilinearScorer final : public DifferentiableScorer {
 public:
  // W entries drawn as seeded Gaussians (mean 0, sd 0.1).
  BilinearScorer(int dim, std::uint64_t seed);
  explicit BilinearScorer(std::vector<std::vector<double>> weight);

  double forward(const EmbeddingSeq& query, const EmbeddingSeq& doc) const override;
  EmbeddingSeq grad_doc(const EmbeddingSeq& query, const EmbeddingSeq& doc) const override;

  int dim() const { return static_cast<int>(weight_.size()); }
  const std::vector<std::vector<double>>& weight() const { return weight_; }

 private:
  std::vector<std::vector<double>> weight_;
};

// Squashes another scorer's logit through a sigmoid. Keeps the gradient
// contract via the chain rule; useful where a bounded, nonlinear relevance
// score is wanted. Does not own the inner scorer.
class SigmoidScorer final : public DifferentiableScorer {
 public:
  explicit SigmoidScorer(const DifferentiableScorer& inner) : inner_(inner) {}

  double forward(const EmbeddingSeq& query, const EmbeddingSeq& doc) const override;
  EmbeddingSeq grad_doc(const EmbeddingSeq& query, const EmbeddingSeq& doc) const override;

 private:
  const DifferentiableScorer& inner_;
};

// Pointwise cross-entropy loss against a positive relevance label:
// -ln(sigmoid(f)). Numerically stable for large |f|.
double loss_from_logit(double f_value);

// Integrated-gradients attribution of the scorer logit for document token
// `token_index`: zero baseline, `steps` interpolation points over the whole
// document side, averaged (the 1/steps factor is included). Returns the dot
// product of the token embedding with the averaged path gradient.
// Throws std::invalid_argument when steps < 1.
double integrad(const DifferentiableScorer& scorer, const EmbeddingSeq& query,
                const EmbeddingSeq& doc, int token_index, int steps);

// Attributions for every document token at once (one gradient evaluation per
// interpolation step instead of one per token). Identical arithmetic to
// integrad per token.
std::vector<double> integrad_all(const DifferentiableScorer& scorer, const EmbeddingSeq& query,
                                 const EmbeddingSeq& doc, int steps);

// a_i = g_i / sum_j |g_j|. An all-zero input normalizes to all zeros.
std::vector<double> normalize_saliency(const std::vector<double>& raw);

// Per-token attributions for one document, surfaces aligned by index.
struct SaliencyVector {
  std::vector<std::string> surfaces;
  std::vector<double> raw;
  std::vector<double> normalized;
};

SaliencyVector compute_saliency(const DifferentiableScorer& scorer, const EmbeddingSeq& query,
                                const EmbeddingSeq& doc, std::vector<std::string> surfaces,
                                int steps);

// The k distinct content surfaces with highest raw saliency, returned best
// first. Repeated surfaces keep their best-scoring occurrence; score ties go
// to the earlier position. Fewer than k are returned when the document lacks
// k distinct content tokens. Requires k >= 1.
std::vector<std::string> select_constraint_tokens(const SaliencyVector& saliency,
                                                  const StopList& stops, int k);

// Scorer file ("RELCONSTRAIN-SCORER v1"): dimension and seed, with optional
// explicit embedding vectors and weight-matrix rows overriding the seeded
// defaults.
struct ScorerSpec {
  int dim = 16;
  std::uint64_t seed = 42;
  std::unordered_map<std::string, Embedding> embeddings;
  std::optional<std::vector<std::vector<double>>> weight;

  static ScorerSpec from_file(const std::string& path);
  void save(const std::string& path) const;

  BilinearScorer make_scorer() const;
  EmbeddingTable make_table(const Vocabulary& vocab) const;
};

}  // namespace relconstrain
