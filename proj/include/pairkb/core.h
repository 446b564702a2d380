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

// Domain types shared by every module: embeddings, knowledge-base entries,
// the knowledge base itself and scored hits.
//
// Storage is 32-bit float, every inner product accumulates in double.
// Knowledge bases normalize embeddings at ingest, so cosine similarity
// and the inner product coincide everywhere downstream.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pairkb/status.h"

namespace pairkb {

using EntryId = std::uint64_t;
using IdSet = std::unordered_set<EntryId>;

// Tolerance on |norm - 1| for a vector to count as unit length.
inline constexpr double kUnitTolerance = 1e-4;

class Embedding {
 public:
  Embedding() = default;

  // Throws kInvalidArgument on an empty vector and kNonFinite on NaN/Inf.
  explicit Embedding(std::vector<float> values);
  Embedding(std::initializer_list<float> values)
      : Embedding(std::vector<float>(values)) {}

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }

  double norm() const noexcept;
  bool is_unit(double tolerance = kUnitTolerance) const noexcept;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<float> values_;
};

Embedding l2_normalize(const Embedding& v);

// Inner product accumulated in double. Throws kDimMismatch.
double dot(const Embedding& u, const Embedding& v);
double dot(std::span<const float> u, std::span<const float> v);

bool is_valid_utf8(std::string_view text) noexcept;

struct PairEntry {
  EntryId id = 0;
  Embedding audio;
  Embedding text;
  std::string caption;
  std::string audio_uri;
  std::string source;
};

struct KbSchema {
  std::size_t audio_dim = 0;
  std::size_t text_dim = 0;
  bool normalized = true;

  bool shared_space() const noexcept { return audio_dim == text_dim; }
  friend bool operator==(const KbSchema&, const KbSchema&) = default;
};

// How KnowledgeBase treats incoming embeddings.
enum class Ingest {
  kNormalize,  // l2-normalize every embedding
  kValidate,   // require unit norm within kUnitTolerance, keep bits as-is
};

// Immutable collection of pair entries. After construction every embedding
// is unit length and the schema reports normalized == true.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  KnowledgeBase(std::string name, std::size_t audio_dim, std::size_t text_dim,
                std::vector<PairEntry> entries, Ingest ingest = Ingest::kNormalize);

  const std::string& name() const noexcept { return name_; }
  const KbSchema& schema() const noexcept { return schema_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const std::vector<PairEntry>& entries() const noexcept { return entries_; }
  const PairEntry& at(std::size_t position) const { return entries_.at(position); }

  bool contains(EntryId id) const { return positions_.contains(id); }
  std::optional<std::size_t> position_of(EntryId id) const;
  // Throws kUnknownEntryId.
  const PairEntry& entry(EntryId id) const;
  const PairEntry* find_by_audio_uri(std::string_view uri) const;

  // Entries whose ids are in `ids`, in this KB's order, under a new name.
  KnowledgeBase subset(const IdSet& ids, std::string name) const;

 private:
  std::string name_;
  KbSchema schema_;
  std::vector<PairEntry> entries_;
  std::unordered_map<EntryId, std::size_t> positions_;
};

// One retrieved entry. s_text is absent for audio-only scoring; for the
// cross-modal strategies it holds the audio-query-to-caption similarity.
struct ScoredHit {
  EntryId entry_id = 0;
  double s_audio = 0.0;
  std::optional<double> s_text;
  double s_fused = 0.0;

  friend bool operator==(const ScoredHit&, const ScoredHit&) = default;
};

// Ranking order used everywhere: score descending, ties by ascending id.
template <typename Score>
constexpr bool ranks_before(Score score_a, EntryId id_a, Score score_b, EntryId id_b) {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

inline bool ranks_before(const ScoredHit& a, const ScoredHit& b) {
  return ranks_before(a.s_fused, a.entry_id, b.s_fused, b.entry_id);
}

}  // namespace pairkb
