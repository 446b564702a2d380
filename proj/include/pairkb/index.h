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

// Exact flat search and an IVF-flat style clustered index over one field of
// a knowledge base. Scores are inner products on unit vectors (cosine); the
// pair_concat field holds [audio ; text] with unit parts, and its score is
// half the inner product so it stays a cosine.

#include <filesystem>
#include <optional>
#include <string_view>

#include "pairkb/core.h"

namespace pairkb {

enum class Field : std::uint8_t { kAudio = 0, kText = 1, kPairConcat = 2 };
enum class IndexKind : std::uint8_t { kFlat = 0, kClustered = 1 };

std::string_view field_name(Field field);
std::optional<Field> parse_field(std::string_view name);
std::string_view index_kind_name(IndexKind kind);

std::size_t field_dim(const KbSchema& schema, Field field);
// The vector an entry contributes to an index over `field`.
std::vector<float> field_vector(const PairEntry& entry, Field field);

struct SearchHit {
  EntryId id = 0;
  double score = 0.0;
  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

// Sorted by score descending, ties by ascending id; no duplicate ids.
struct TopKResult {
  std::vector<SearchHit> hits;
  friend bool operator==(const TopKResult&, const TopKResult&) = default;
};

struct ClusterParams {
  std::size_t n_clusters = 16;
  std::size_t n_probe = 4;
  std::uint64_t seed = 42;
  std::size_t max_iterations = 25;
};

class VectorIndex {
 public:
  VectorIndex() = default;

  Field field() const noexcept { return field_; }
  IndexKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t n_clusters() const noexcept { return kind_ == IndexKind::kFlat ? 1 : posting_.size(); }
  std::size_t n_probe() const noexcept { return n_probe_; }

  const std::vector<EntryId>& ids() const noexcept { return ids_; }
  std::span<const float> row(std::size_t position) const {
    return {rows_.data() + position * dim_, dim_};
  }
  std::span<const float> centroid(std::size_t cluster) const {
    return {centroids_.data() + cluster * dim_, dim_};
  }
  // Entry ids per cluster (a single list for flat indexes).
  std::vector<std::vector<EntryId>> posting_lists() const;

  // n_probe overrides the index default for clustered indexes; ignored by
  // flat ones. Throws kDimMismatch, kInvalidK, kInvalidArgument.
  TopKResult search(std::span<const float> query, std::size_t k, const IdSet* exclude = nullptr,
                    std::optional<std::size_t> n_probe = std::nullopt) const;

  double score_row(std::span<const float> query, std::size_t position) const;

 private:
  friend VectorIndex build_flat(const KnowledgeBase&, Field);
  friend VectorIndex build_clustered(const KnowledgeBase&, Field, const ClusterParams&);
  friend VectorIndex load_index(const std::filesystem::path&);
  friend void save_index(const VectorIndex&, const std::filesystem::path&);

  static VectorIndex gather(const KnowledgeBase& kb, Field field, IndexKind kind);

  Field field_ = Field::kAudio;
  IndexKind kind_ = IndexKind::kFlat;
  std::size_t dim_ = 0;
  std::size_t n_probe_ = 1;
  double score_scale_ = 1.0;
  std::vector<EntryId> ids_;
  std::vector<float> rows_;
  std::vector<float> centroids_;
  std::vector<std::vector<std::uint32_t>> posting_;  // row positions per cluster
};

// Throws kEmptyKB.
VectorIndex build_flat(const KnowledgeBase& kb, Field field);
// Seeded spherical k-means. Throws kEmptyKB, kBadClusterCount.
VectorIndex build_clustered(const KnowledgeBase& kb, Field field, const ClusterParams& params);

TopKResult search_topk(const VectorIndex& index, const Embedding& query, std::size_t k,
                       const IdSet* exclude = nullptr);

// PKIX index file (layout documented in index.cc). Throws kIoError, kBadMagic,
// kVersionUnsupported, kTruncatedFile, kCorruptIndex.
void save_index(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_index(const std::filesystem::path& path);

}  // namespace pairkb
