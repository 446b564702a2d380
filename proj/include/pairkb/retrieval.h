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

// The five retrieval strategies. Each scores a (query, entry) pair into a
// ScoredHit; retrieve() ranks a whole knowledge base, either by full scan or
// by over-fetching per-modality candidates from indexes and re-ranking them
// exactly.

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "pairkb/core.h"
#include "pairkb/index.h"
#include "pairkb/providers.h"

namespace pairkb {

enum class StrategyTag {
  kAudioToAudio,
  kAudioToText,
  kAudioToMixture,
  kPairToPair,
  kGenerativePairToPair,
};

inline constexpr double kDefaultWeight = 0.5;

std::string_view strategy_name(StrategyTag tag);
std::optional<StrategyTag> parse_strategy(std::string_view name);

// W is present exactly for the two pair strategies.
class Strategy {
 public:
  static Strategy audio_to_audio() { return Strategy(StrategyTag::kAudioToAudio, std::nullopt); }
  static Strategy audio_to_text() { return Strategy(StrategyTag::kAudioToText, std::nullopt); }
  static Strategy audio_to_mixture() {
    return Strategy(StrategyTag::kAudioToMixture, std::nullopt);
  }
  // Throws kInvalidArgument unless 0 <= weight <= 1.
  static Strategy pair_to_pair(double weight = kDefaultWeight);
  static Strategy generative_pair_to_pair(double weight = kDefaultWeight);
  static Strategy make(StrategyTag tag, double weight = kDefaultWeight);

  StrategyTag tag() const noexcept { return tag_; }
  std::optional<double> weight() const noexcept { return weight_; }
  bool is_pair() const noexcept { return weight_.has_value(); }

 private:
  Strategy(StrategyTag tag, std::optional<double> weight) : tag_(tag), weight_(weight) {}
  StrategyTag tag_;
  std::optional<double> weight_;
};

struct RetrievalQuery {
  Embedding audio;                     // query audio embedding
  std::optional<Embedding> text;       // query text embedding, given or generated
  std::optional<std::string> text_query;
  std::optional<std::string> audio_ref;
};

ScoredHit score_audio_to_audio(const RetrievalQuery& q, const PairEntry& entry);
// Both cross-modal scorers require a shared space (d_A == d_T); the entry's
// dims are checked against the query, and kSharedSpaceRequired is raised
// when the text side has a different dim from the audio query.
ScoredHit score_audio_to_text(const RetrievalQuery& q, const PairEntry& entry);
ScoredHit score_audio_to_mixture(const RetrievalQuery& q, const PairEntry& entry);
ScoredHit score_pair_to_pair(const RetrievalQuery& q, const PairEntry& entry, double weight);

ScoredHit score_entry(const Strategy& strategy, const RetrievalQuery& q, const PairEntry& entry);

// Per-field indexes used by the over-fetch path.
struct IndexSet {
  std::shared_ptr<const VectorIndex> audio;
  std::shared_ptr<const VectorIndex> text;

  static IndexSet flat(const KnowledgeBase& kb);
  static IndexSet clustered(const KnowledgeBase& kb, const ClusterParams& params);
};

struct RetrieveOptions {
  // Knowledge bases at or below this size are ranked by full scan.
  std::size_t exact_threshold = 100'000;
  // Initial candidates per modality = overfetch_factor * k.
  std::size_t overfetch_factor = 4;
  // Use the index path even below exact_threshold.
  bool force_overfetch = false;
};

// Top-k by s_fused, ties by ascending id. Throws kInvalidK, kMissingTextQuery,
// kDimMismatch, kSharedSpaceRequired, kMissingIndex.
std::vector<ScoredHit> retrieve(const KnowledgeBase& kb, const IndexSet& indexes,
                                const Strategy& strategy, const RetrievalQuery& q, std::size_t k,
                                const IdSet* exclude = nullptr, const RetrieveOptions& options = {});

// Full-scan ranking, independent of any index.
std::vector<ScoredHit> retrieve_exhaustive(const KnowledgeBase& kb, const Strategy& strategy,
                                           const RetrievalQuery& q, std::size_t k,
                                           const IdSet* exclude = nullptr);

struct GenerativeResult {
  std::string text_query;
  std::vector<ScoredHit> hits;
};

// Captions q.audio_ref, encodes the caption and runs pair-to-pair with it.
// Throws kCaptionFailed, kEncodeFailed plus retrieve() errors.
GenerativeResult generative_retrieve(const KnowledgeBase& kb, const IndexSet& indexes,
                                     const RetrievalQuery& q, const CaptionProvider& captioner,
                                     const EncoderProvider& text_encoder, double weight,
                                     std::size_t k, const IdSet* exclude = nullptr,
                                     const RetrieveOptions& options = {});

}  // namespace pairkb
