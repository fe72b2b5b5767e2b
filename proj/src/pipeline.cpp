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

#include "relconstrain/pipeline.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace relconstrain {

namespace {

using json = nlohmann::ordered_json;

std::string require_string_field(const json& obj, const char* field, int lineno) {
  if (!obj.contains(field))
    throw std::runtime_error("line " + std::to_string(lineno) + ": missing field " + field);
  if (!obj.at(field).is_string())
    throw std::runtime_error("line " + std::to_string(lineno) + ": field " + field +
                             " must be a string");
  return obj.at(field).get<std::string>();
}

json parse_jsonl_line(const std::string& line, int lineno) {
  try {
    json obj = json::parse(line);
    if (!obj.is_object())
      throw std::runtime_error("not a JSON object");
    return obj;
  } catch (const std::exception& e) {
    throw std::runtime_error("line " + std::to_string(lineno) + ": malformed JSON (" +
                             std::string(e.what()) + ")");
  }
}

std::string join_surfaces(const std::vector<std::string>& surfaces) {
  std::string out;
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    if (i > 0) out += " ";
    out += surfaces[i];
  }
  return out;
}

json rouge_triple_json(const RougeTriple& t) {
  return json{{"p", t.precision}, {"r", t.recall}, {"f1", t.f1}};
}

json t_test_json(const PairedTestResult& r) {
  json out;
  if (std::isfinite(r.t_stat))
    out["t_stat"] = r.t_stat;
  else
    out["t_stat"] = r.t_stat > 0 ? "inf" : "-inf";
  out["p_value"] = r.p_value;
  out["df"] = r.df;
  return out;
}

std::vector<std::vector<std::string>> cnf_to_strings(const Cnf& cnf) {
  std::vector<std::vector<std::string>> out;
  out.reserve(cnf.clauses.size());
  for (const auto& clause : cnf.clauses) {
    std::vector<std::string> literals;
    literals.reserve(clause.literals.size());
    for (const auto& literal : clause.literals) literals.push_back(join_surfaces(literal.tokens));
    out.push_back(std::move(literals));
  }
  return out;
}

RougeScores mean_rouge(const std::vector<RougeScores>& scores) {
  RougeScores mean;
  if (scores.empty()) return mean;
  auto add = [](RougeTriple& acc, const RougeTriple& x) {
    acc.precision += x.precision;
    acc.recall += x.recall;
    acc.f1 += x.f1;
  };
  for (const auto& s : scores) {
    add(mean.r1, s.r1);
    add(mean.r2, s.r2);
    add(mean.rl, s.rl);
  }
  const double inv = 1.0 / static_cast<double>(scores.size());
  for (RougeTriple* t : {&mean.r1, &mean.r2, &mean.rl}) {
    t->precision *= inv;
    t->recall *= inv;
    t->f1 *= inv;
  }
  return mean;
}

}  // namespace

std::vector<QfsExample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<QfsExample> examples;
  std::set<std::string> seen_ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const json obj = parse_jsonl_line(line, lineno);
    QfsExample ex;
    ex.id = require_string_field(obj, "id", lineno);
    ex.query = require_string_field(obj, "query", lineno);
    ex.document = require_string_field(obj, "document", lineno);
    ex.summary = require_string_field(obj, "summary", lineno);
    if (ex.query.empty())
      throw std::runtime_error("line " + std::to_string(lineno) + ": empty field query");
    if (ex.document.empty())
      throw std::runtime_error("line " + std::to_string(lineno) + ": empty field document");
    if (!seen_ids.insert(ex.id).second)
      throw std::runtime_error("line " + std::to_string(lineno) + ": duplicate id " + ex.id);
    examples.push_back(std::move(ex));
  }
  return examples;
}

ConstraintSource constraint_source_from_string(const std::string& name) {
  if (name == "query") return ConstraintSource::kQuery;
  if (name == "document") return ConstraintSource::kDocument;
  if (name == "both") return ConstraintSource::kBoth;
  throw std::invalid_argument("unknown constraint source: " + name +
                              " (expected query, document or both)");
}

std::string to_string(ConstraintSource source) {
  switch (source) {
    case ConstraintSource::kQuery: return "query";
    case ConstraintSource::kDocument: return "document";
    case ConstraintSource::kBoth: return "both";
  }
  throw std::logic_error("invalid ConstraintSource");
}

Cnf constrain_example(const QfsExample& ex, const ScorerSpec& scorer, int ig_steps,
                      const StopList& stops, const MorphologyTable& morph, int k,
                      ConstraintSource source, int max_doc_tokens) {
  std::vector<std::string> query_tokens = tokenize(ex.query);
  std::vector<std::string> doc_tokens = tokenize(ex.document);
  if (max_doc_tokens > 0 && static_cast<int>(doc_tokens.size()) > max_doc_tokens) {
    std::fprintf(stderr, "warning: example %s: document truncated to %d tokens\n", ex.id.c_str(),
                 max_doc_tokens);
    doc_tokens.resize(static_cast<std::size_t>(max_doc_tokens));
  }

  // The attributed side gets the saliency scores; the other side acts as the
  // scorer's fixed context.
  std::vector<std::string> attributed, context;
  switch (source) {
    case ConstraintSource::kDocument:
      attributed = doc_tokens;
      context = query_tokens;
      break;
    case ConstraintSource::kQuery:
      attributed = query_tokens;
      context = doc_tokens;
      break;
    case ConstraintSource::kBoth:
      attributed = query_tokens;
      attributed.insert(attributed.end(), doc_tokens.begin(), doc_tokens.end());
      context = query_tokens;
      break;
  }
  if (attributed.empty()) return Cnf{};

  const Vocabulary local_vocab = Vocabulary::from_corpus({context, attributed});
  const EmbeddingTable table = scorer.make_table(local_vocab);
  const EmbeddingSeq context_embs = table.embed(local_vocab.encode(context));
  const EmbeddingSeq attributed_embs = table.embed(local_vocab.encode(attributed));
  const BilinearScorer model = scorer.make_scorer();

  const SaliencyVector saliency =
      compute_saliency(model, context_embs, attributed_embs, attributed, ig_steps);
  const std::vector<std::string> selected = select_constraint_tokens(saliency, stops, k);
  return build_cnf(selected, morph);
}

std::string report_to_json(const PipelineReport& report) {
  json out;
  out["report_version"] = 1;
  out["n_examples"] = report.n_examples;
  out["constrained"] = {
      {"r1", rouge_triple_json(report.mean.r1)},
      {"r2", rouge_triple_json(report.mean.r2)},
      {"rl", rouge_triple_json(report.mean.rl)},
      {"satisfaction_rate", report.satisfaction_rate},
  };
  if (report.has_baseline) {
    out["unconstrained"] = {
        {"r1", rouge_triple_json(report.baseline_mean.r1)},
        {"r2", rouge_triple_json(report.baseline_mean.r2)},
        {"rl", rouge_triple_json(report.baseline_mean.rl)},
        {"satisfaction_rate", report.baseline_satisfaction_rate},
    };
    out["significance"] = {
        {"r1", t_test_json(report.significance_r1)},
        {"r2", t_test_json(report.significance_r2)},
        {"rl", t_test_json(report.significance_rl)},
    };
  }
  out["examples"] = json::array();
  for (const auto& ex : report.examples) {
    json row;
    row["id"] = ex.id;
    row["prediction"] = ex.prediction;
    row["constraints"] = ex.constraints;
    row["satisfied"] = ex.satisfied;
    row["cum_logprob"] = ex.cum_logprob;
    row["rouge"] = {{"r1_f1", ex.rouge.r1.f1}, {"r2_f1", ex.rouge.r2.f1}, {"rl_f1", ex.rouge.rl.f1}};
    if (report.has_baseline) {
      row["baseline_prediction"] = ex.baseline_prediction;
      row["baseline_satisfied"] = ex.baseline_satisfied;
      row["baseline_cum_logprob"] = ex.baseline_cum_logprob;
      row["baseline_rouge"] = {{"r1_f1", ex.baseline_rouge.r1.f1},
                               {"r2_f1", ex.baseline_rouge.r2.f1},
                               {"rl_f1", ex.baseline_rouge.rl.f1}};
    }
    out["examples"].push_back(std::move(row));
  }
  return out.dump(2) + "\n";
}

PipelineReport run_pipeline(const PipelineConfig& cfg) {
  if (cfg.k_constraints < 1) throw std::invalid_argument("k_constraints must be >= 1");
  cfg.decoder.validate();
  if (cfg.output_dir.empty()) throw std::invalid_argument("output_dir must be set");
  std::filesystem::create_directories(cfg.output_dir);

  const StopList stops =
      cfg.stopword_path.empty() ? StopList::default_english() : StopList::from_file(cfg.stopword_path);
  const MorphologyTable morph =
      cfg.morphology_path.empty() ? MorphologyTable{} : MorphologyTable::from_file(cfg.morphology_path);
  ScorerSpec scorer;
  if (!cfg.scorer_path.empty()) {
    scorer = ScorerSpec::from_file(cfg.scorer_path);
  } else {
    scorer.dim = cfg.embed_dim;
    scorer.seed = cfg.seed;
  }

  // Train (or load) the LM. Training sequences are query <sep> summary so the
  // n-gram model picks up query conditioning; documents enter via constraints.
  NGramLm lm = [&] {
    if (!cfg.lm_path.empty()) return NGramLm::load(cfg.lm_path);
    const std::vector<QfsExample> train = load_dataset(cfg.train_path);
    std::vector<std::vector<std::string>> corpus;
    corpus.reserve(train.size());
    for (const auto& ex : train) {
      std::vector<std::string> seq = tokenize(ex.query);
      seq.push_back(kSepSurface);
      const std::vector<std::string> summary = tokenize(ex.summary);
      seq.insert(seq.end(), summary.begin(), summary.end());
      corpus.push_back(std::move(seq));
    }
    Vocabulary vocab = Vocabulary::from_corpus(corpus);
    std::vector<std::vector<int>> ids;
    ids.reserve(corpus.size());
    for (const auto& seq : corpus) ids.push_back(vocab.encode(seq));
    return NGramLm::train(std::move(vocab), ids, cfg.lm_order, cfg.lm_k);
  }();
  const Vocabulary& vocab = lm.vocab();

  const std::vector<QfsExample> test = load_dataset(cfg.test_path);

  PipelineReport report;
  report.n_examples = static_cast<int>(test.size());
  report.has_baseline = cfg.baseline;

  std::vector<RougeScores> rouges, baseline_rouges;
  int satisfied_count = 0, baseline_satisfied_count = 0;

  for (const auto& ex : test) {
    try {
      const Cnf cnf = constrain_example(ex, scorer, cfg.ig_steps, stops, morph, cfg.k_constraints,
                                        cfg.source, cfg.max_doc_tokens);

      std::vector<std::string> prefix_surfaces = tokenize(ex.query);
      prefix_surfaces.push_back(kSepSurface);
      const std::vector<int> prefix = vocab.encode(prefix_surfaces);

      const DecodeResult decoded = nld_decode(lm, prefix, cnf, cfg.decoder);
      const std::vector<std::string> body = vocab.decode(decoded.tokens);

      ExampleReport row;
      row.id = ex.id;
      row.prediction = join_surfaces(body);
      row.constraints = cnf_to_strings(cnf);
      row.satisfied = cnf_satisfied(cnf, body);  // full re-scan, not the tracker
      row.cum_logprob = decoded.cum_logprob;
      row.rouge = rouge_all(tokenize(row.prediction), tokenize(ex.summary));
      rouges.push_back(row.rouge);
      if (row.satisfied) ++satisfied_count;

      if (cfg.baseline) {
        const DecodeResult plain = beam_search(lm, prefix, cfg.decoder);
        const std::vector<std::string> plain_body = vocab.decode(plain.tokens);
        row.baseline_prediction = join_surfaces(plain_body);
        row.baseline_satisfied = cnf_satisfied(cnf, plain_body);
        row.baseline_cum_logprob = plain.cum_logprob;
        row.baseline_rouge = rouge_all(tokenize(row.baseline_prediction), tokenize(ex.summary));
        baseline_rouges.push_back(row.baseline_rouge);
        if (row.baseline_satisfied) ++baseline_satisfied_count;
      }
      report.examples.push_back(std::move(row));
    } catch (const std::exception& e) {
      throw std::runtime_error("example " + ex.id + ": " + e.what());
    }
  }

  report.mean = mean_rouge(rouges);
  report.satisfaction_rate =
      test.empty() ? 1.0 : static_cast<double>(satisfied_count) / static_cast<double>(test.size());
  if (cfg.baseline) {
    report.baseline_mean = mean_rouge(baseline_rouges);
    report.baseline_satisfaction_rate =
        test.empty() ? 1.0
                     : static_cast<double>(baseline_satisfied_count) / static_cast<double>(test.size());
    if (test.size() >= 2) {
      auto f1s = [](const std::vector<RougeScores>& ss, RougeTriple RougeScores::*m) {
        std::vector<double> out;
        out.reserve(ss.size());
        for (const auto& s : ss) out.push_back((s.*m).f1);
        return out;
      };
      report.significance_r1 =
          paired_t_test(f1s(rouges, &RougeScores::r1), f1s(baseline_rouges, &RougeScores::r1));
      report.significance_r2 =
          paired_t_test(f1s(rouges, &RougeScores::r2), f1s(baseline_rouges, &RougeScores::r2));
      report.significance_rl =
          paired_t_test(f1s(rouges, &RougeScores::rl), f1s(baseline_rouges, &RougeScores::rl));
    }
  }

  // Outputs: predictions JSONL (+ unconstrained twin) and the report.
  const std::filesystem::path out_dir(cfg.output_dir);
  {
    std::ofstream out(out_dir / "predictions.jsonl");
    if (!out) throw std::runtime_error("cannot write predictions.jsonl");
    for (const auto& row : report.examples) {
      json obj;
      obj["id"] = row.id;
      obj["prediction"] = row.prediction;
      obj["constraints"] = row.constraints;
      obj["satisfied"] = row.satisfied;
      obj["cum_logprob"] = row.cum_logprob;
      out << obj.dump() << "\n";
    }
  }
  if (cfg.baseline) {
    std::ofstream out(out_dir / "predictions_unconstrained.jsonl");
    if (!out) throw std::runtime_error("cannot write predictions_unconstrained.jsonl");
    for (const auto& row : report.examples) {
      json obj;
      obj["id"] = row.id;
      obj["prediction"] = row.baseline_prediction;
      obj["constraints"] = row.constraints;
      obj["satisfied"] = row.baseline_satisfied;
      obj["cum_logprob"] = row.baseline_cum_logprob;
      out << obj.dump() << "\n";
    }
  }
  {
    std::ofstream out(out_dir / "report.json");
    if (!out) throw std::runtime_error("cannot write report.json");
    out << report_to_json(report);
  }
  return report;
}

namespace {

struct ScoredPredictions {
  std::vector<std::string> ids;  // file order
  std::unordered_map<std::string, RougeScores> scores;
};

std::unordered_map<std::string, std::string> read_keyed_jsonl(const std::string& path,
                                                              const char* field,
                                                              const char* alt_field,
                                                              std::vector<std::string>* order) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::unordered_map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const json obj = parse_jsonl_line(line, lineno);
    const std::string id = require_string_field(obj, "id", lineno);
    const char* use = field;
    if (alt_field != nullptr && !obj.contains(field) && obj.contains(alt_field)) use = alt_field;
    const std::string value = require_string_field(obj, use, lineno);
    if (!out.emplace(id, value).second)
      throw std::runtime_error("line " + std::to_string(lineno) + ": duplicate id " + id);
    if (order) order->push_back(id);
  }
  return out;
}

ScoredPredictions score_predictions(const std::string& predictions_path,
                                    const std::unordered_map<std::string, std::string>& references) {
  ScoredPredictions sp;
  const auto preds = read_keyed_jsonl(predictions_path, "prediction", nullptr, &sp.ids);
  for (const auto& id : sp.ids) {
    auto ref = references.find(id);
    if (ref == references.end())
      throw std::runtime_error("no reference for id " + id + " in " + predictions_path);
    sp.scores[id] = rouge_all(tokenize(preds.at(id)), tokenize(ref->second));
  }
  return sp;
}

}  // namespace

std::string evaluate_files(const std::string& predictions_path, const std::string& references_path,
                           const std::string& compare_path) {
  const auto references = read_keyed_jsonl(references_path, "reference", "summary", nullptr);
  const ScoredPredictions main = score_predictions(predictions_path, references);

  std::vector<RougeScores> all;
  all.reserve(main.ids.size());
  for (const auto& id : main.ids) all.push_back(main.scores.at(id));
  const RougeScores mean = mean_rouge(all);

  json out;
  out["report_version"] = 1;
  out["n_examples"] = static_cast<int>(main.ids.size());
  out["r1"] = rouge_triple_json(mean.r1);
  out["r2"] = rouge_triple_json(mean.r2);
  out["rl"] = rouge_triple_json(mean.rl);

  if (!compare_path.empty()) {
    const ScoredPredictions other = score_predictions(compare_path, references);
    std::vector<double> a1, b1, a2, b2, al, bl;
    for (const auto& id : main.ids) {
      auto it = other.scores.find(id);
      if (it == other.scores.end())
        throw std::runtime_error("compare file has no prediction for id " + id);
      a1.push_back(main.scores.at(id).r1.f1);
      b1.push_back(it->second.r1.f1);
      a2.push_back(main.scores.at(id).r2.f1);
      b2.push_back(it->second.r2.f1);
      al.push_back(main.scores.at(id).rl.f1);
      bl.push_back(it->second.rl.f1);
    }
    if (other.ids.size() != main.ids.size())
      throw std::runtime_error("compare file does not cover the same ids");
    out["significance"] = {
        {"r1", t_test_json(paired_t_test(a1, b1))},
        {"r2", t_test_json(paired_t_test(a2, b2))},
        {"rl", t_test_json(paired_t_test(al, bl))},
    };
  }
  return out.dump(2) + "\n";
}

}  // namespace relconstrain
