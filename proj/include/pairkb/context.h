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

// Few-shot context assembly for a downstream audio language model: the
// retrieved (audio, caption) demonstrations interleaved in order, followed
// by the query audio. Also builds the two curriculum-phase manifests used
// for retrieval-augmented fine-tuning (phase 1 without demonstrations,
// phase 2 with 1..K retrieved ones).

#include <filesystem>
#include <string>

#include "pairkb/core.h"
#include "pairkb/retrieval.h"

namespace pairkb {

struct Demonstration {
  std::string audio_ref;
  std::string caption;
  EntryId source_entry_id = 0;
  double s_fused = 0.0;
};

enum class OrderPolicy {
  kAscendingSimilarity,   // most similar demonstration last, next to the query
  kDescendingSimilarity,
};

struct InterleavedContext {
  std::vector<Demonstration> demonstrations;
  std::string query_audio_ref;
  OrderPolicy order_policy = OrderPolicy::kAscendingSimilarity;
};

// hits must already be ranked (s_fused descending). Throws kUnknownEntryId.
InterleavedContext assemble_context(const std::vector<ScoredHit>& hits, const KnowledgeBase& kb,
                                    std::string query_audio_ref, std::size_t k,
                                    OrderPolicy policy = OrderPolicy::kAscendingSimilarity);

// {"demonstrations":[{"audio_ref":...,"caption":...},...],"query_audio_ref":...}
// Compact, fixed key order, byte-stable.
std::string render_context_json(const InterleavedContext& ctx);

inline constexpr std::size_t kTrainMaxShots = 5;
inline constexpr std::size_t kEvalMaxShots = 10;

struct CurriculumSample {
  EntryId query_id = 0;
  std::size_t k = 0;  // 0 in phase 1
  std::vector<EntryId> demonstration_ids;
};

struct CurriculumManifest {
  int phase = 1;
  std::vector<CurriculumSample> samples;

  // One {"phase","query_id","k","demonstration_ids"} object per line.
  std::string to_jsonl() const;
};

struct Curriculum {
  CurriculumManifest phase1;
  CurriculumManifest phase2;
};

// Trainset entries act as queries (audio + reference text embeddings).
// Phase-2 k is drawn uniformly from 1..K per query with an RNG seeded from
// (seed, query id); demonstrations never include the query's own id.
// Throws kInvalidK plus retrieval errors.
Curriculum build_curriculum(const KnowledgeBase& trainset, const KnowledgeBase& kb,
                            const IndexSet& indexes, const Strategy& strategy, std::size_t max_k,
                            std::uint64_t seed);

}  // namespace pairkb
