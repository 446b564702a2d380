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

#include "pairkb/retrieval.h"

#include <algorithm>

namespace pairkb {

std::string_view strategy_name(StrategyTag tag) {
  switch (tag) {
    case StrategyTag::kAudioToAudio: return "audio_to_audio";
    case StrategyTag::kAudioToText: return "audio_to_text";
    case StrategyTag::kAudioToMixture: return "audio_to_mixture";
    case StrategyTag::kPairToPair: return "pair_to_pair";
    case StrategyTag::kGenerativePairToPair: return "generative_pair_to_pair";
  }
  return "unknown";
}

std::optional<StrategyTag> parse_strategy(std::string_view name) {
  for (auto tag : {StrategyTag::kAudioToAudio, StrategyTag::kAudioToText,
                   StrategyTag::kAudioToMixture, StrategyTag::kPairToPair,
                   StrategyTag::kGenerativePairToPair}) {
    if (strategy_name(tag) == name) return tag;
  }
  return std::nullopt;
}

namespace {

double checked_weight(double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "W must be in [0, 1], got " + std::to_string(weight));
  }
  return weight;
}

}  // namespace

Strategy Strategy::pair_to_pair(double weight) {
  return Strategy(StrategyTag::kPairToPair, checked_weight(weight));
}

Strategy Strategy::generative_pair_to_pair(double weight) {
  return Strategy(StrategyTag::kGenerativePairToPair, checked_weight(weight));
}

Strategy Strategy::make(StrategyTag tag, double weight) {
  switch (tag) {
    case StrategyTag::kPairToPair: return pair_to_pair(weight);
    case StrategyTag::kGenerativePairToPair: return generative_pair_to_pair(weight);
    default: return Strategy(tag, std::nullopt);
  }
}

// --- scoring ---------------------------------------------------------------

namespace {

void require_same_dim(const Embedding& a, const Embedding& b, const char* what) {
  if (a.dim() != b.dim()) {
    fail(ErrorCode::kDimMismatch, std::string(what) + ": dim " + std::to_string(a.dim()) +
                                      " vs " + std::to_string(b.dim()));
  }
}

void require_shared_space(const RetrievalQuery& q, const PairEntry& entry) {
  require_same_dim(q.audio, entry.audio, "audio query vs entry audio");
  if (entry.text.dim() != q.audio.dim()) {
    fail(ErrorCode::kSharedSpaceRequired,
         "cross-modal scoring needs d_A == d_T (" + std::to_string(q.audio.dim()) + " vs " +
             std::to_string(entry.text.dim()) + ")");
  }
}

}  // namespace

ScoredHit score_audio_to_audio(const RetrievalQuery& q, const PairEntry& entry) {
  require_same_dim(q.audio, entry.audio, "audio query vs entry audio");
  const double s = dot(q.audio, entry.audio);
  return {entry.id, s, std::nullopt, s};
}

ScoredHit score_audio_to_text(const RetrievalQuery& q, const PairEntry& entry) {
  require_shared_space(q, entry);
  const double s_text = dot(q.audio, entry.text);
  return {entry.id, dot(q.audio, entry.audio), s_text, s_text};
}

ScoredHit score_audio_to_mixture(const RetrievalQuery& q, const PairEntry& entry) {
  require_shared_space(q, entry);
  const double s_audio = dot(q.audio, entry.audio);
  const double s_text = dot(q.audio, entry.text);
  return {entry.id, s_audio, s_text, (s_audio + s_text) / 2.0};
}

ScoredHit score_pair_to_pair(const RetrievalQuery& q, const PairEntry& entry, double weight) {
  if (!q.text) fail(ErrorCode::kMissingTextQuery, "pair-to-pair scoring needs a text query");
  require_same_dim(q.audio, entry.audio, "audio query vs entry audio");
  require_same_dim(*q.text, entry.text, "text query vs entry text");
  const double s_audio = dot(q.audio, entry.audio);
  const double s_text = dot(*q.text, entry.text);
  return {entry.id, s_audio, s_text, weight * s_audio + (1.0 - weight) * s_text};
}

ScoredHit score_entry(const Strategy& strategy, const RetrievalQuery& q, const PairEntry& entry) {
  switch (strategy.tag()) {
    case StrategyTag::kAudioToAudio: return score_audio_to_audio(q, entry);
    case StrategyTag::kAudioToText: return score_audio_to_text(q, entry);
    case StrategyTag::kAudioToMixture: return score_audio_to_mixture(q, entry);
    case StrategyTag::kPairToPair:
    case StrategyTag::kGenerativePairToPair:
      return score_pair_to_pair(q, entry, *strategy.weight());
  }
  fail(ErrorCode::kInvalidArgument, "unknown strategy");
}

// --- ranking ---------------------------------------------------------------

IndexSet IndexSet::flat(const KnowledgeBase& kb) {
  return {std::make_shared<VectorIndex>(build_flat(kb, Field::kAudio)),
          std::make_shared<VectorIndex>(build_flat(kb, Field::kText))};
}

IndexSet IndexSet::clustered(const KnowledgeBase& kb, const ClusterParams& params) {
  return {std::make_shared<VectorIndex>(build_clustered(kb, Field::kAudio, params)),
          std::make_shared<VectorIndex>(build_clustered(kb, Field::kText, params))};
}

namespace {

// Query-level precondition checks, so an empty KB still reports them.
void validate_query(const KbSchema& schema, const Strategy& strategy, const RetrievalQuery& q,
                    std::size_t k) {
  if (k == 0) fail(ErrorCode::kInvalidK, "k must be >= 1");
  if (q.audio.dim() != schema.audio_dim) {
    fail(ErrorCode::kDimMismatch, "audio query dim " + std::to_string(q.audio.dim()) +
                                      ", KB audio dim " + std::to_string(schema.audio_dim));
  }
  switch (strategy.tag()) {
    case StrategyTag::kAudioToAudio: break;
    case StrategyTag::kAudioToText:
    case StrategyTag::kAudioToMixture:
      if (!schema.shared_space()) {
        fail(ErrorCode::kSharedSpaceRequired,
             std::string(strategy_name(strategy.tag())) + " needs d_A == d_T");
      }
      break;
    case StrategyTag::kPairToPair:
    case StrategyTag::kGenerativePairToPair:
      if (!q.text) fail(ErrorCode::kMissingTextQuery, "pair strategies need a text query");
      if (q.text->dim() != schema.text_dim) {
        fail(ErrorCode::kDimMismatch, "text query dim " + std::to_string(q.text->dim()) +
                                          ", KB text dim " + std::to_string(schema.text_dim));
      }
      break;
  }
}

std::vector<ScoredHit> cut_to_k(std::vector<ScoredHit> hits, std::size_t k) {
  const auto keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                    [](const ScoredHit& a, const ScoredHit& b) { return ranks_before(a, b); });
  hits.resize(keep);
  return hits;
}

const VectorIndex& require_index(const std::shared_ptr<const VectorIndex>& index, Field field,
                                 const KnowledgeBase& kb) {
  if (!index) {
    fail(ErrorCode::kMissingIndex, "no " + std::string(field_name(field)) + " index built");
  }
  if (index->field() != field || index->size() != kb.size()) {
    fail(ErrorCode::kInvalidArgument,
         std::string(field_name(field)) + " index does not belong to knowledge base " + kb.name());
  }
  return *index;
}

// Late fusion over two per-field candidate lists with exact re-scoring:
// fused = audio_weight * <audio_query, A_k> + text_weight * <text_query, T_k>.
//
// With exact (flat) lists the fetch depth doubles until the k-th fused
// score beats the best score any unseen entry could reach, so the result
// equals the full scan. Clustered lists are approximate and are fetched once.
std::vector<ScoredHit> overfetch(const KnowledgeBase& kb, const IndexSet& indexes,
                                 const Strategy& strategy, const RetrievalQuery& q,
                                 std::span<const float> audio_query, double audio_weight,
                                 std::span<const float> text_query, double text_weight,
                                 std::size_t k, const IdSet* exclude,
                                 const RetrieveOptions& options) {
  const bool use_audio = audio_weight > 0.0;
  const bool use_text = text_weight > 0.0;
  const VectorIndex* audio_index =
      use_audio ? &require_index(indexes.audio, Field::kAudio, kb) : nullptr;
  const VectorIndex* text_index =
      use_text ? &require_index(indexes.text, Field::kText, kb) : nullptr;
  const bool exact = (!use_audio || audio_index->kind() == IndexKind::kFlat) &&
                     (!use_text || text_index->kind() == IndexKind::kFlat);

  const std::size_t n = kb.size();
  std::size_t depth = std::min(n, std::max<std::size_t>(1, options.overfetch_factor) * k);
  for (;;) {
    IdSet seen;
    bool exhausted = false;
    double bound = 0.0;
    auto take = [&](const VectorIndex* index, std::span<const float> query, double weight) {
      const auto result = index->search(query, depth, exclude);
      for (const auto& h : result.hits) seen.insert(h.id);
      if (result.hits.size() < depth) exhausted = true;
      if (!result.hits.empty()) bound += weight * result.hits.back().score;
    };
    if (use_audio) take(audio_index, audio_query, audio_weight);
    if (use_text) take(text_index, text_query, text_weight);

    std::vector<ScoredHit> candidates;
    candidates.reserve(seen.size());
    for (EntryId id : seen) candidates.push_back(score_entry(strategy, q, kb.entry(id)));
    auto top = cut_to_k(std::move(candidates), k);

    if (!exact || exhausted || depth >= n) return top;
    if (top.size() == k && top.back().s_fused > bound) return top;
    depth = std::min(n, depth * 2);
  }
}

}  // namespace

std::vector<ScoredHit> retrieve_exhaustive(const KnowledgeBase& kb, const Strategy& strategy,
                                           const RetrievalQuery& q, std::size_t k,
                                           const IdSet* exclude) {
  validate_query(kb.schema(), strategy, q, k);
  std::vector<ScoredHit> hits;
  hits.reserve(kb.size());
  for (const auto& e : kb.entries()) {
    if (exclude != nullptr && exclude->contains(e.id)) continue;
    hits.push_back(score_entry(strategy, q, e));
  }
  return cut_to_k(std::move(hits), k);
}

std::vector<ScoredHit> retrieve(const KnowledgeBase& kb, const IndexSet& indexes,
                                const Strategy& strategy, const RetrievalQuery& q, std::size_t k,
                                const IdSet* exclude, const RetrieveOptions& options) {
  validate_query(kb.schema(), strategy, q, k);
  if (kb.empty()) return {};
  if (kb.size() <= options.exact_threshold && !options.force_overfetch) {
    return retrieve_exhaustive(kb, strategy, q, k, exclude);
  }

  const auto audio = q.audio.values();
  switch (strategy.tag()) {
    case StrategyTag::kAudioToAudio:
      return overfetch(kb, indexes, strategy, q, audio, 1.0, {}, 0.0, k, exclude, options);
    case StrategyTag::kAudioToText:
      return overfetch(kb, indexes, strategy, q, {}, 0.0, audio, 1.0, k, exclude, options);
    case StrategyTag::kAudioToMixture:
      return overfetch(kb, indexes, strategy, q, audio, 0.5, audio, 0.5, k, exclude, options);
    case StrategyTag::kPairToPair:
    case StrategyTag::kGenerativePairToPair: {
      const double w = *strategy.weight();
      return overfetch(kb, indexes, strategy, q, audio, w, q.text->values(), 1.0 - w, k, exclude,
                       options);
    }
  }
  fail(ErrorCode::kInvalidArgument, "unknown strategy");
}

GenerativeResult generative_retrieve(const KnowledgeBase& kb, const IndexSet& indexes,
                                     const RetrievalQuery& q, const CaptionProvider& captioner,
                                     const EncoderProvider& text_encoder, double weight,
                                     std::size_t k, const IdSet* exclude,
                                     const RetrieveOptions& options) {
  const auto strategy = Strategy::generative_pair_to_pair(weight);
  if (!q.audio_ref) fail(ErrorCode::kCaptionFailed, "query has no audio_ref to caption");

  GenerativeResult out;
  try {
    out.text_query = captioner.caption(*q.audio_ref);
  } catch (const Error& e) {
    fail(ErrorCode::kCaptionFailed, e.what());
  }
  RetrievalQuery transformed = q;
  try {
    transformed.text = text_encoder.encode(out.text_query);
  } catch (const Error& e) {
    fail(ErrorCode::kEncodeFailed, e.what());
  }
  transformed.text_query = out.text_query;
  out.hits = retrieve(kb, indexes, strategy, transformed, k, exclude, options);
  return out;
}

}  // namespace pairkb
