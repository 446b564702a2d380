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

#include "pairkb/fusion.h"

#include <algorithm>

namespace pairkb {

CandidateText make_candidate(EntryId id, std::string text, const Embedding& embedding) {
  if (text.empty()) fail(ErrorCode::kEmptyCaption, "candidate " + std::to_string(id) + " has no text");
  return {id, std::move(text), l2_normalize(embedding)};
}

double fused_candidate_score(const FusionQuery& q, const CandidateText& c,
                             const FusionWeights& weights) {
  return weights.audio * dot(q.audio, c.embedding) + weights.text * dot(q.gen_text, c.embedding);
}

TopKResult cross_modal_rank(const FusionQuery& q, const std::vector<CandidateText>& candidates,
                            std::size_t k, const FusionWeights& weights) {
  if (candidates.empty()) fail(ErrorCode::kEmptyCandidates, "no candidates to rank");
  if (k == 0) fail(ErrorCode::kInvalidK, "k must be >= 1");
  TopKResult out;
  out.hits.reserve(candidates.size());
  for (const auto& c : candidates) out.hits.push_back({c.id, fused_candidate_score(q, c, weights)});
  const auto keep = std::min(k, out.hits.size());
  std::partial_sort(out.hits.begin(), out.hits.begin() + static_cast<std::ptrdiff_t>(keep),
                    out.hits.end(), [](const SearchHit& a, const SearchHit& b) {
                      return ranks_before(a.score, a.id, b.score, b.id);
                    });
  out.hits.resize(keep);
  return out;
}

std::pair<EntryId, double> zero_shot_classify(const FusionQuery& q,
                                              const std::vector<CandidateText>& classes,
                                              const FusionWeights& weights) {
  const auto top = cross_modal_rank(q, classes, 1, weights);
  return {top.hits.front().id, top.hits.front().score};
}

}  // namespace pairkb
