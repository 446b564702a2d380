// Copyright 2026 The PairKB Authors
//
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

#include "pairkb/eval.h"

#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "pairkb/parallel.h"

namespace pairkb {

using ordered_json = nlohmann::ordered_json;

void GroundTruth::validate(const KnowledgeBase& pool) const {
  for (const auto& [query, ids] : relevant) {
    for (EntryId id : ids) {
      if (!pool.contains(id)) {
        fail(ErrorCode::kUnknownEntryId, "ground truth for query " + std::to_string(query) +
                                             " names id " + std::to_string(id) +
                                             ", which is not in " + pool.name());
      }
    }
  }
}

GroundTruth GroundTruth::self_pairs(const std::vector<EntryId>& query_ids) {
  GroundTruth truth;
  for (EntryId id : query_ids) truth.relevant[id] = {id};
  return truth;
}

double recall_at_k(const Rankings& rankings, const GroundTruth& truth, std::size_t k) {
  if (k == 0) fail(ErrorCode::kInvalidK, "k must be >= 1");
  if (truth.relevant.empty()) fail(ErrorCode::kInvalidArgument, "ground truth is empty");
  std::size_t found = 0;
  for (const auto& [query, correct] : truth.relevant) {
    auto it = rankings.find(query);
    if (it == rankings.end()) {
      fail(ErrorCode::kMissingRanking, "no ranking for query " + std::to_string(query));
    }
    const auto& ranked = it->second;
    const auto depth = std::min(k, ranked.size());
    for (std::size_t i = 0; i < depth; ++i) {
      if (correct.contains(ranked[i])) {
        ++found;
        break;
      }
    }
  }
  return static_cast<double>(found) / static_cast<double>(truth.relevant.size());
}

double zero_shot_accuracy(const std::map<EntryId, EntryId>& predictions,
                          const std::map<EntryId, EntryId>& truth) {
  if (predictions.size() != truth.size()) {
    fail(ErrorCode::kKeyMismatch, "prediction and truth key sets differ in size");
  }
  if (truth.empty()) fail(ErrorCode::kInvalidArgument, "no labelled queries");
  std::size_t correct = 0;
  for (const auto& [query, label] : truth) {
    auto it = predictions.find(query);
    if (it == predictions.end()) {
      fail(ErrorCode::kKeyMismatch, "no prediction for query " + std::to_string(query));
    }
    if (it->second == label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

std::vector<EvalQuery> queries_from_kb(const KnowledgeBase& queries) {
  std::vector<EvalQuery> out;
  out.reserve(queries.size());
  for (const auto& e : queries.entries()) {
    out.push_back({e.id, RetrievalQuery{e.audio, e.text, e.caption, e.audio_uri}, e.text});
  }
  return out;
}

namespace {

struct QueryOutcome {
  std::vector<ScoredHit> hits;
  std::vector<double> audio_sims;
  std::vector<double> text_sims;
};

std::vector<QueryOutcome> run_queries(const std::vector<EvalQuery>& queries,
                                      const KnowledgeBase& kb, const IndexSet& indexes,
                                      const Strategy& strategy, std::size_t k,
                                      const EvalOptions& options, bool want_similarities) {
  std::vector<QueryOutcome> out(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) {
    const auto& q = queries[i];
    const IdSet self{q.id};
    auto& o = out[i];
    o.hits = retrieve(kb, indexes, strategy, q.query, k, options.exclude_self ? &self : nullptr,
                      options.retrieve);
    if (!want_similarities) return;
    const Embedding* ref = q.reference_text ? &*q.reference_text
                           : q.query.text   ? &*q.query.text
                                            : nullptr;
    if (ref == nullptr) {
      fail(ErrorCode::kMissingTextQuery,
           "query " + std::to_string(q.id) + " has neither a reference caption nor a text query");
    }
    for (const auto& h : o.hits) {
      const auto& e = kb.entry(h.entry_id);
      o.audio_sims.push_back(dot(q.query.audio, e.audio));
      o.text_sims.push_back(dot(*ref, e.text));
    }
  });
  return out;
}

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(xs.size()))};
}

SimilarityStats aggregate(const std::vector<QueryOutcome>& outcomes, const Strategy& strategy) {
  SimilarityStats stats;
  stats.strategy = std::string(strategy_name(strategy.tag()));
  std::vector<double> audio, text;
  for (const auto& o : outcomes) {
    audio.insert(audio.end(), o.audio_sims.begin(), o.audio_sims.end());
    text.insert(text.end(), o.text_sims.begin(), o.text_sims.end());
    stats.per_query_audio.push_back(moments(o.audio_sims).mean);
    stats.per_query_text.push_back(moments(o.text_sims).mean);
  }
  if (audio.empty()) fail(ErrorCode::kEmptyRetrieval, "no hits were retrieved for any query");
  const auto a = moments(audio);
  const auto t = moments(text);
  stats.mean_audio_sim = a.mean;
  stats.std_audio_sim = a.stddev;
  stats.mean_text_sim = t.mean;
  stats.std_text_sim = t.stddev;
  stats.n = audio.size();
  return stats;
}

Rankings rankings_of(const std::vector<EvalQuery>& queries,
                     const std::vector<QueryOutcome>& outcomes) {
  Rankings r;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    auto& ids = r[queries[i].id];
    for (const auto& h : outcomes[i].hits) ids.push_back(h.entry_id);
  }
  return r;
}

SweepPoint evaluate_point(double value, const std::vector<EvalQuery>& queries,
                          const KnowledgeBase& kb, const IndexSet& indexes,
                          const Strategy& strategy, std::size_t k, const SweepSpec& spec) {
  bool want_sims = false;
  for (auto m : spec.metrics) {
    if (m == Metric::kMeanAudioSim || m == Metric::kMeanTextSim) want_sims = true;
    if ((m == Metric::kRecallAtK || m == Metric::kAccuracy) && spec.truth == nullptr) {
      fail(ErrorCode::kInvalidArgument,
           std::string(metric_name(m)) + " needs ground truth relevance");
    }
  }
  const auto outcomes = run_queries(queries, kb, indexes, strategy, k, spec.options, want_sims);
  SweepPoint point;
  point.value = value;
  point.rankings = rankings_of(queries, outcomes);
  std::optional<SimilarityStats> stats;
  if (want_sims) stats = aggregate(outcomes, strategy);
  for (auto m : spec.metrics) {
    double v = 0.0;
    switch (m) {
      case Metric::kRecallAtK: v = recall_at_k(point.rankings, *spec.truth, k); break;
      case Metric::kAccuracy: v = recall_at_k(point.rankings, *spec.truth, 1); break;
      case Metric::kMeanAudioSim: v = stats->mean_audio_sim; break;
      case Metric::kMeanTextSim: v = stats->mean_text_sim; break;
    }
    point.metrics.emplace_back(m, v);
  }
  return point;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

SimilarityStats similarity_stats(const std::vector<EvalQuery>& queries, const KnowledgeBase& kb,
                                 const IndexSet& indexes, const Strategy& strategy, std::size_t k,
                                 const EvalOptions& options) {
  if (queries.empty()) fail(ErrorCode::kEmptyRetrieval, "no queries");
  return aggregate(run_queries(queries, kb, indexes, strategy, k, options, true), strategy);
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kRecallAtK: return "recall@k";
    case Metric::kAccuracy: return "accuracy";
    case Metric::kMeanAudioSim: return "mean_audio_sim";
    case Metric::kMeanTextSim: return "mean_text_sim";
  }
  return "unknown";
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (auto m : {Metric::kRecallAtK, Metric::kAccuracy, Metric::kMeanAudioSim,
                 Metric::kMeanTextSim}) {
    if (metric_name(m) == name) return m;
  }
  return std::nullopt;
}

std::string SweepResult::to_csv() const {
  std::string out = "axis_value,metric_name,metric_value,strategy,kb,k,W,seed\n";
  for (const auto& p : points) {
    const std::size_t k_col = axis == SweepAxis::kTopK ? static_cast<std::size_t>(p.value) : k;
    std::optional<double> w_col = axis == SweepAxis::kWeight ? std::optional(p.value) : weight;
    for (const auto& [metric, value] : p.metrics) {
      out += format_number(p.value) + "," + std::string(metric_name(metric)) + "," +
             format_number(value) + "," + strategy + "," + kb + "," + std::to_string(k_col) + "," +
             (w_col ? format_number(*w_col) : std::string()) + "," + std::to_string(seed) + "\n";
    }
  }
  return out;
}

std::string SweepResult::to_json() const {
  ordered_json doc;
  doc["axis"] = axis == SweepAxis::kWeight ? "W" : "top_k";
  doc["strategy"] = strategy;
  doc["kb"] = kb;
  if (axis == SweepAxis::kWeight) doc["k"] = k;
  if (axis == SweepAxis::kTopK && weight) doc["W"] = *weight;
  doc["seed"] = seed;
  auto& pts = doc["points"] = ordered_json::array();
  for (const auto& p : points) {
    ordered_json point;
    point["value"] = p.value;
    auto& metrics = point["metrics"] = ordered_json::object();
    for (const auto& [metric, value] : p.metrics) metrics[std::string(metric_name(metric))] = value;
    auto& top1 = point["top1"] = ordered_json::object();
    for (const auto& [query, ids] : p.rankings) {
      if (!ids.empty()) top1[std::to_string(query)] = ids.front();
    }
    pts.push_back(std::move(point));
  }
  return doc.dump(2);
}

SweepResult weight_sweep(const std::vector<EvalQuery>& queries, const KnowledgeBase& kb,
                         const IndexSet& indexes, const std::vector<double>& weights,
                         std::size_t k, const SweepSpec& spec, StrategyTag tag) {
  if (k == 0) fail(ErrorCode::kInvalidK, "k must be >= 1");
  if (tag != StrategyTag::kPairToPair && tag != StrategyTag::kGenerativePairToPair) {
    fail(ErrorCode::kInvalidArgument, "weight sweeps need a pair strategy");
  }
  for (std::size_t i = 1; i < weights.size(); ++i) {
    if (!(weights[i] > weights[i - 1])) {
      fail(ErrorCode::kUnsortedAxis, "W values must be strictly increasing");
    }
  }
  SweepResult result;
  result.axis = SweepAxis::kWeight;
  result.strategy = std::string(strategy_name(tag));
  result.kb = kb.name();
  result.k = k;
  result.seed = spec.seed;
  for (double w : weights) {
    result.points.push_back(
        evaluate_point(w, queries, kb, indexes, Strategy::make(tag, w), k, spec));
  }
  return result;
}

SweepResult topk_sweep(const std::vector<EvalQuery>& queries, const KnowledgeBase& kb,
                       const IndexSet& indexes, const std::vector<std::size_t>& ks,
                       const Strategy& strategy, const SweepSpec& spec) {
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] == 0) fail(ErrorCode::kInvalidK, "k values must be positive");
    if (i > 0 && ks[i] <= ks[i - 1]) {
      fail(ErrorCode::kUnsortedAxis, "k values must be strictly increasing");
    }
  }
  SweepResult result;
  result.axis = SweepAxis::kTopK;
  result.strategy = std::string(strategy_name(strategy.tag()));
  result.kb = kb.name();
  result.weight = strategy.weight();
  result.seed = spec.seed;
  for (std::size_t k : ks) {
    result.points.push_back(
        evaluate_point(static_cast<double>(k), queries, kb, indexes, strategy, k, spec));
  }
  return result;
}

}  // namespace pairkb
