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

#pragma once

// Retrieval-side metrics and ablation sweeps: recall@k, zero-shot accuracy,
// similarity statistics of retrieved pairs, and sweeps over the fusion
// weight W or the retrieval depth k.

#include <map>
#include <optional>
#include <set>
#include <string>

#include "pairkb/core.h"
#include "pairkb/retrieval.h"

namespace pairkb {

using Rankings = std::map<EntryId, std::vector<EntryId>>;

struct GroundTruth {
  std::map<EntryId, std::set<EntryId>> relevant;  // query id -> correct candidate ids

  // Every referenced id must be in `pool`. Throws kUnknownEntryId.
  void validate(const KnowledgeBase& pool) const;
  // Each query is relevant to the candidate with its own id.
  static GroundTruth self_pairs(const std::vector<EntryId>& query_ids);
};

// Fraction of truth queries with a correct id in their first k candidates.
// Throws kInvalidK, kMissingRanking.
double recall_at_k(const Rankings& rankings, const GroundTruth& truth, std::size_t k);

// Throws kKeyMismatch when the key sets differ.
double zero_shot_accuracy(const std::map<EntryId, EntryId>& predictions,
                          const std::map<EntryId, EntryId>& truth);

struct EvalQuery {
  EntryId id = 0;
  RetrievalQuery query;
  std::optional<Embedding> reference_text;  // embedding of the reference caption
};

// Entries of a query store become queries: audio and text embeddings as
// the multimodal query, the text embedding doubling as the reference.
std::vector<EvalQuery> queries_from_kb(const KnowledgeBase& queries);

struct EvalOptions {
  // Exclude each query's own id from its hits.
  bool exclude_self = true;
  RetrieveOptions retrieve;
};

struct SimilarityStats {
  std::string strategy;
  double mean_audio_sim = 0.0;
  double mean_text_sim = 0.0;
  double std_audio_sim = 0.0;
  double std_text_sim = 0.0;
  std::size_t n = 0;  // pooled hit count
  // Per-query means, in query order.
  std::vector<double> per_query_audio;
  std::vector<double> per_query_text;
};

// Pools s_audio = <A_q, A_k> and s_text = <ref, T_k> over every retrieved
// hit, where ref is the query's reference caption embedding or, failing
// that, its text query. Throws kEmptyRetrieval, kMissingTextQuery.
SimilarityStats similarity_stats(const std::vector<EvalQuery>& queries, const KnowledgeBase& kb,
                                 const IndexSet& indexes, const Strategy& strategy, std::size_t k,
                                 const EvalOptions& options = {});

enum class Metric { kRecallAtK, kAccuracy, kMeanAudioSim, kMeanTextSim };

std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);

enum class SweepAxis { kWeight, kTopK };

struct SweepPoint {
  double value = 0.0;
  std::vector<std::pair<Metric, double>> metrics;
  Rankings rankings;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::kWeight;
  std::string strategy;
  std::string kb;
  std::size_t k = 0;              // fixed k of a weight sweep
  std::optional<double> weight;   // fixed W of a top-k sweep
  std::uint64_t seed = 0;
  std::vector<SweepPoint> points;

  // axis_value,metric_name,metric_value,strategy,kb,k,W,seed
  std::string to_csv() const;
  std::string to_json() const;
};

struct SweepSpec {
  std::vector<Metric> metrics;
  const GroundTruth* truth = nullptr;  // required for recall and accuracy
  std::uint64_t seed = 0;              // recorded in outputs
  EvalOptions options;
};

// W values strictly increasing within [0, 1]. Throws kUnsortedAxis.
SweepResult weight_sweep(const std::vector<EvalQuery>& queries, const KnowledgeBase& kb,
                         const IndexSet& indexes, const std::vector<double>& weights,
                         std::size_t k, const SweepSpec& spec,
                         StrategyTag tag = StrategyTag::kPairToPair);

// k values strictly increasing and positive. Throws kUnsortedAxis, kInvalidK.
SweepResult topk_sweep(const std::vector<EvalQuery>& queries, const KnowledgeBase& kb,
                       const IndexSet& indexes, const std::vector<std::size_t>& ks,
                       const Strategy& strategy, const SweepSpec& spec);

}  // namespace pairkb
