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

// Refined knowledge-base construction: every trainset pair, embedded as the
// concatenation of its unit audio and text embeddings, retrieves its top-k
// closest pairs from a large KB by cosine; the union of those hits becomes
// the refined KB.
//
// Because both parts are unit vectors, cosine([a;t], [a';t']) is exactly
// (<a,a'> + <t,t'>) / 2, i.e. the pair-to-pair fused score at W = 0.5.

#include <optional>
#include <string>

#include "pairkb/core.h"
#include "pairkb/index.h"

namespace pairkb {

struct ConcatEmbedding {
  EntryId parent_id = 0;
  std::vector<float> values;  // [audio ; text], not re-normalized
};

ConcatEmbedding concat_embedding(const PairEntry& entry);

// cosine of two concatenations, computed as a normalized inner product.
double concat_cosine(const ConcatEmbedding& a, const ConcatEmbedding& b);

struct RefineQueryHits {
  EntryId query_id = 0;
  TopKResult hits;
};

struct RefineReport {
  std::size_t input_kb_size = 0;
  std::size_t trainset_size = 0;
  std::size_t k = 0;
  bool exclude_self = false;
  std::size_t output_size = 0;
  std::vector<RefineQueryHits> queries;

  // input_kb_size / output_size (0 when the output is empty).
  double compression_ratio() const;
  std::string to_json() const;
};

struct RefineResult {
  KnowledgeBase refined;
  RefineReport report;
};

// exclude_self unset means "exclude when the trainset and KB share any id".
// Throws kSchemaMismatch, kEmptyKB, kEmptyTrainset, kInvalidK.
RefineResult refine_kb(const KnowledgeBase& kb, const KnowledgeBase& trainset, std::size_t k,
                       std::optional<bool> exclude_self = std::nullopt,
                       std::string name = "refined");

}  // namespace pairkb
