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

// Synthetic knowledge bases for tests, demos and desk-scale sweeps.

#include <cstdint>

#include "pairkb/core.h"

namespace pairkb {

// The three-entry toy KB used throughout the docs and tests:
//   id 1  audio (1, 0)      text (1, 0)      "dog barking"
//   id 2  audio (0, 1)      text (0, 1)      "rain falling"
//   id 3  audio (0.8, 0.6)  text (0.6, 0.8)  "dog barking in the rain"
KnowledgeBase toy_kb();

struct CorpusParams {
  std::size_t n = 1000;
  std::size_t audio_dim = 16;
  std::size_t text_dim = 16;
  std::uint64_t seed = 42;
  // text = normalize(c * lift(audio) + (1 - c) * noise), c in [0, 1].
  double correlation = 0.5;
  EntryId first_id = 1;
  std::string name = "synthetic";
};

// lift() maps the unit audio vector into d_T dims by cyclic repetition
// (identity when d_A == d_T). Throws kInvalidArgument.
KnowledgeBase generate_corpus(const CorpusParams& params);

struct QueryParams {
  std::size_t count = 100;
  // Each modality gets an independent isotropic perturbation of this norm.
  double noise = 0.5;
  std::uint64_t seed = 7;
};

// Perturbed copies of `count` distinct KB entries; every query keeps the id
// of the entry it came from, so that entry is its ground truth.
KnowledgeBase generate_queries(const KnowledgeBase& kb, const QueryParams& params);

// Random unit vectors, seeded.
std::vector<Embedding> random_unit_vectors(std::size_t count, std::size_t dim,
                                           std::uint64_t seed);

}  // namespace pairkb
