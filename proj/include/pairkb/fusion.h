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

// Score fusion with a generated caption for cross-modal retrieval and
// zero-shot classification:
//
//   S(y) = <audio_q, text_y> + <gen_text_q, text_y>
//
// where gen_text_q embeds the caption generated from the query audio and
// text_y a candidate caption or prompted class name. The sum is unweighted
// by default; FusionWeights scales either term.

#include <string>
#include <utility>

#include "pairkb/core.h"
#include "pairkb/index.h"

namespace pairkb {

struct CandidateText {
  EntryId id = 0;
  std::string text;
  Embedding embedding;  // unit length
};

// Validates non-empty text and normalizes the embedding.
CandidateText make_candidate(EntryId id, std::string text, const Embedding& embedding);

struct FusionQuery {
  Embedding audio;     // query audio embedding
  Embedding gen_text;  // generated caption embedding; all zeros disables the term
};

struct FusionWeights {
  double audio = 1.0;
  double text = 1.0;
};

// Throws kDimMismatch.
double fused_candidate_score(const FusionQuery& q, const CandidateText& c,
                             const FusionWeights& weights = {});

// Throws kEmptyCandidates, kInvalidK.
TopKResult cross_modal_rank(const FusionQuery& q, const std::vector<CandidateText>& candidates,
                            std::size_t k, const FusionWeights& weights = {});

// argmax over classes, ties to the lower id. Throws kEmptyCandidates.
std::pair<EntryId, double> zero_shot_classify(const FusionQuery& q,
                                              const std::vector<CandidateText>& classes,
                                              const FusionWeights& weights = {});

}  // namespace pairkb
