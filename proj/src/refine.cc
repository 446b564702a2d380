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

#include "pairkb/refine.h"

#include <cmath>

#include "json.hpp"
#include "pairkb/parallel.h"

namespace pairkb {

ConcatEmbedding concat_embedding(const PairEntry& entry) {
  return {entry.id, field_vector(entry, Field::kPairConcat)};
}

double concat_cosine(const ConcatEmbedding& a, const ConcatEmbedding& b) {
  const double na = std::sqrt(dot(a.values, a.values));
  const double nb = std::sqrt(dot(b.values, b.values));
  if (na == 0.0 || nb == 0.0) fail(ErrorCode::kZeroVector, "cosine of a zero vector");
  return dot(a.values, b.values) / (na * nb);
}

double RefineReport::compression_ratio() const {
  return output_size == 0 ? 0.0
                          : static_cast<double>(input_kb_size) / static_cast<double>(output_size);
}

std::string RefineReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["input_kb_size"] = input_kb_size;
  doc["trainset_size"] = trainset_size;
  doc["k"] = k;
  doc["exclude_self"] = exclude_self;
  doc["output_size"] = output_size;
  doc["compression_ratio"] = compression_ratio();
  auto& queries_json = doc["queries"] = nlohmann::ordered_json::array();
  for (const auto& q : queries) {
    nlohmann::ordered_json hits = nlohmann::ordered_json::array();
    for (const auto& h : q.hits.hits) hits.push_back({{"id", h.id}, {"score", h.score}});
    queries_json.push_back({{"query_id", q.query_id}, {"hits", std::move(hits)}});
  }
  return doc.dump();
}

RefineResult refine_kb(const KnowledgeBase& kb, const KnowledgeBase& trainset, std::size_t k,
                       std::optional<bool> exclude_self, std::string name) {
  if (k == 0) fail(ErrorCode::kInvalidK, "k must be >= 1");
  if (kb.schema() != trainset.schema()) {
    fail(ErrorCode::kSchemaMismatch, "KB dims (" + std::to_string(kb.schema().audio_dim) + ", " +
                                         std::to_string(kb.schema().text_dim) +
                                         ") differ from trainset dims (" +
                                         std::to_string(trainset.schema().audio_dim) + ", " +
                                         std::to_string(trainset.schema().text_dim) + ")");
  }
  if (kb.empty()) fail(ErrorCode::kEmptyKB, "knowledge base is empty");
  if (trainset.empty()) fail(ErrorCode::kEmptyTrainset, "trainset is empty");

  bool exclude = false;
  if (exclude_self) {
    exclude = *exclude_self;
  } else {
    for (const auto& q : trainset.entries()) {
      if (kb.contains(q.id)) {
        exclude = true;
        break;
      }
    }
  }

  const VectorIndex index = build_flat(kb, Field::kPairConcat);

  RefineReport report;
  report.input_kb_size = kb.size();
  report.trainset_size = trainset.size();
  report.k = k;
  report.exclude_self = exclude;
  report.queries.resize(trainset.size());

  parallel_for(trainset.size(), [&](std::size_t i) {
    const auto& q = trainset.at(i);
    const auto query = concat_embedding(q);
    const IdSet self{q.id};
    report.queries[i] = {q.id, index.search(query.values, k, exclude ? &self : nullptr)};
  });

  IdSet kept;
  for (const auto& q : report.queries) {
    for (const auto& h : q.hits.hits) kept.insert(h.id);
  }
  report.output_size = kept.size();
  return {kb.subset(kept, std::move(name)), std::move(report)};
}

}  // namespace pairkb
