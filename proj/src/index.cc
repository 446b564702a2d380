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

#include "pairkb/index.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>

#include "pairkb/binary_io.h"

namespace pairkb {

namespace fs = std::filesystem;

std::string_view field_name(Field field) {
  switch (field) {
    case Field::kAudio: return "audio";
    case Field::kText: return "text";
    case Field::kPairConcat: return "pair_concat";
  }
  return "unknown";
}

std::optional<Field> parse_field(std::string_view name) {
  if (name == "audio") return Field::kAudio;
  if (name == "text") return Field::kText;
  if (name == "pair_concat") return Field::kPairConcat;
  return std::nullopt;
}

std::string_view index_kind_name(IndexKind kind) {
  return kind == IndexKind::kFlat ? "flat" : "clustered";
}

std::size_t field_dim(const KbSchema& schema, Field field) {
  switch (field) {
    case Field::kAudio: return schema.audio_dim;
    case Field::kText: return schema.text_dim;
    case Field::kPairConcat: return schema.audio_dim + schema.text_dim;
  }
  return 0;
}

std::vector<float> field_vector(const PairEntry& entry, Field field) {
  switch (field) {
    case Field::kAudio: return {entry.audio.values().begin(), entry.audio.values().end()};
    case Field::kText: return {entry.text.values().begin(), entry.text.values().end()};
    case Field::kPairConcat: {
      std::vector<float> out(entry.audio.values().begin(), entry.audio.values().end());
      out.insert(out.end(), entry.text.values().begin(), entry.text.values().end());
      return out;
    }
  }
  return {};
}

namespace {

double scale_for(Field field) { return field == Field::kPairConcat ? 0.5 : 1.0; }

struct WorseFirst {
  bool operator()(const SearchHit& a, const SearchHit& b) const {
    return ranks_before(a.score, a.id, b.score, b.id);
  }
};

// Bounded collector keeping the k best hits seen so far.
class TopKCollector {
 public:
  explicit TopKCollector(std::size_t k) : k_(k) {}

  void offer(EntryId id, double score) {
    if (heap_.size() < k_) {
      heap_.push({id, score});
    } else if (ranks_before(score, id, heap_.top().score, heap_.top().id)) {
      heap_.pop();
      heap_.push({id, score});
    }
  }

  TopKResult finish() && {
    TopKResult out;
    out.hits.reserve(heap_.size());
    while (!heap_.empty()) {
      out.hits.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.hits.begin(), out.hits.end());
    return out;
  }

 private:
  std::size_t k_;
  std::priority_queue<SearchHit, std::vector<SearchHit>, WorseFirst> heap_;
};

// Index of the highest-scoring centroid; ties go to the lower index.
std::size_t nearest_centroid(std::span<const float> v, const std::vector<float>& centroids,
                             std::size_t dim, std::size_t n_clusters) {
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n_clusters; ++c) {
    const double s = dot(v, std::span<const float>(centroids.data() + c * dim, dim));
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

void normalize_in_place(std::span<float> v) {
  double n = 0.0;
  for (float x : v) n += static_cast<double>(x) * x;
  n = std::sqrt(n);
  if (n == 0.0) return;
  for (float& x : v) x = static_cast<float>(x / n);
}

}  // namespace

VectorIndex VectorIndex::gather(const KnowledgeBase& kb, Field field, IndexKind kind) {
  if (kb.empty()) fail(ErrorCode::kEmptyKB, "cannot index an empty knowledge base");
  VectorIndex index;
  index.field_ = field;
  index.kind_ = kind;
  index.dim_ = field_dim(kb.schema(), field);
  index.score_scale_ = scale_for(field);
  index.ids_.reserve(kb.size());
  index.rows_.reserve(kb.size() * index.dim_);
  for (const auto& e : kb.entries()) {
    index.ids_.push_back(e.id);
    const auto v = field_vector(e, field);
    index.rows_.insert(index.rows_.end(), v.begin(), v.end());
  }
  return index;
}

VectorIndex build_flat(const KnowledgeBase& kb, Field field) {
  VectorIndex index = VectorIndex::gather(kb, field, IndexKind::kFlat);
  std::vector<std::uint32_t> all(index.size());
  std::iota(all.begin(), all.end(), 0u);
  index.posting_.push_back(std::move(all));
  index.n_probe_ = 1;
  return index;
}

VectorIndex build_clustered(const KnowledgeBase& kb, Field field, const ClusterParams& params) {
  if (kb.empty()) fail(ErrorCode::kEmptyKB, "cannot index an empty knowledge base");
  const std::size_t n = kb.size();
  const std::size_t n_clusters = params.n_clusters;
  if (n_clusters == 0 || n_clusters > n) {
    fail(ErrorCode::kBadClusterCount, "n_clusters must be in [1, " + std::to_string(n) +
                                          "], got " + std::to_string(n_clusters));
  }
  if (params.n_probe == 0 || params.n_probe > n_clusters) {
    fail(ErrorCode::kInvalidArgument, "n_probe must be in [1, n_clusters]");
  }

  VectorIndex index = VectorIndex::gather(kb, field, IndexKind::kClustered);
  index.n_probe_ = params.n_probe;
  const std::size_t dim = index.dim_;

  // Seeded k-means++ initialization on cosine distance: the first centre is a
  // uniform row, each further one is drawn with probability proportional to
  // the squared distance from the nearest centre chosen so far.
  std::mt19937_64 rng(params.seed);
  auto& centroids = index.centroids_;
  centroids.assign(n_clusters * dim, 0.0f);
  auto place = [&](std::size_t c, std::size_t row) {
    auto src = index.row(row);
    std::copy(src.begin(), src.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
    normalize_in_place({centroids.data() + c * dim, dim});
  };
  place(0, std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < n_clusters; ++c) {
    const std::span<const float> last(centroids.data() + (c - 1) * dim, dim);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dist = std::max(0.0, 1.0 - dot(index.row(i), last));
      d2[i] = std::min(d2[i], dist * dist);
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    place(c, pick);
  }

  std::vector<std::size_t> assignment(n, n_clusters);
  for (std::size_t iter = 0; iter < params.max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = nearest_centroid(index.row(i), centroids, dim, n_clusters);
      if (c != assignment[i]) {
        assignment[i] = c;
        changed = true;
      }
    }
    if (!changed) break;

    std::vector<double> sums(n_clusters * dim, 0.0);
    std::vector<std::size_t> counts(n_clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = assignment[i];
      ++counts[c];
      auto r = index.row(i);
      for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += r[d];
    }
    const auto largest = static_cast<std::size_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    for (std::size_t c = 0; c < n_clusters; ++c) {
      auto centroid = std::span<float>(centroids.data() + c * dim, dim);
      if (counts[c] == 0) {
        // Re-seed from a random member of the largest cluster.
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
          if (assignment[i] == largest) members.push_back(i);
        }
        std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
        auto src = index.row(members[pick(rng)]);
        std::copy(src.begin(), src.end(), centroid.begin());
      } else {
        for (std::size_t d = 0; d < dim; ++d) {
          centroid[d] = static_cast<float>(sums[c * dim + d] / static_cast<double>(counts[c]));
        }
      }
      normalize_in_place(centroid);
    }
  }

  index.posting_.assign(n_clusters, {});
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = nearest_centroid(index.row(i), centroids, dim, n_clusters);
    index.posting_[c].push_back(static_cast<std::uint32_t>(i));
  }
  return index;
}

std::vector<std::vector<EntryId>> VectorIndex::posting_lists() const {
  std::vector<std::vector<EntryId>> out;
  out.reserve(posting_.size());
  for (const auto& list : posting_) {
    auto& ids = out.emplace_back();
    ids.reserve(list.size());
    for (auto pos : list) ids.push_back(ids_[pos]);
  }
  return out;
}

double VectorIndex::score_row(std::span<const float> query, std::size_t position) const {
  return score_scale_ * dot(query, row(position));
}

TopKResult VectorIndex::search(std::span<const float> query, std::size_t k, const IdSet* exclude,
                               std::optional<std::size_t> n_probe) const {
  if (query.size() != dim_) {
    fail(ErrorCode::kDimMismatch, "query dim " + std::to_string(query.size()) + ", index dim " +
                                      std::to_string(dim_));
  }
  if (k == 0) fail(ErrorCode::kInvalidK, "k must be >= 1");

  TopKCollector collector(std::min(k, size()));
  auto scan = [&](const std::vector<std::uint32_t>& list) {
    for (auto pos : list) {
      const EntryId id = ids_[pos];
      if (exclude != nullptr && exclude->contains(id)) continue;
      collector.offer(id, score_row(query, pos));
    }
  };

  if (kind_ == IndexKind::kFlat) {
    scan(posting_.front());
    return std::move(collector).finish();
  }

  const std::size_t probes = n_probe.value_or(n_probe_);
  if (probes == 0 || probes > posting_.size()) {
    fail(ErrorCode::kInvalidArgument, "n_probe must be in [1, " +
                                          std::to_string(posting_.size()) + "]");
  }
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(posting_.size());
  for (std::size_t c = 0; c < posting_.size(); ++c) ranked.emplace_back(dot(query, centroid(c)), c);
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(probes),
                    ranked.end(), [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first : a.second < b.second;
                    });
  for (std::size_t p = 0; p < probes; ++p) scan(posting_[ranked[p].second]);
  return std::move(collector).finish();
}

TopKResult search_topk(const VectorIndex& index, const Embedding& query, std::size_t k,
                       const IdSet* exclude) {
  return index.search(query.values(), k, exclude);
}

// PKIX layout (little-endian):
//   "PKIX" | u16 version | u8 field | u8 kind | u32 dim | u64 count |
//   u32 n_clusters | u32 n_probe |
//   count x ([u64 id][dim x f32]) |
//   clustered only: n_clusters x dim f32 centroids, then per cluster
//   [u64 length][length x u64 entry id]
namespace {
constexpr char kIndexMagic[4] = {'P', 'K', 'I', 'X'};
constexpr std::uint16_t kIndexVersion = 1;
constexpr std::uint64_t kIndexHeaderSize = 4 + 2 + 1 + 1 + 4 + 8 + 4 + 4;
}  // namespace

void save_index(const VectorIndex& index, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(kIndexMagic, 4);
  io::write_le<std::uint16_t>(out, kIndexVersion);
  io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(index.field_));
  io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(index.kind_));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.dim_));
  io::write_le<std::uint64_t>(out, index.size());
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.n_clusters()));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.n_probe_));
  for (std::size_t i = 0; i < index.size(); ++i) {
    io::write_le<std::uint64_t>(out, index.ids_[i]);
    io::write_f32s(out, index.row(i));
  }
  if (index.kind_ == IndexKind::kClustered) {
    io::write_f32s(out, index.centroids_);
    for (const auto& list : index.posting_) {
      io::write_le<std::uint64_t>(out, list.size());
      for (auto pos : list) io::write_le<std::uint64_t>(out, index.ids_[pos]);
    }
  }
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

VectorIndex load_index(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open index " + path.string());
  std::error_code ec;
  const std::uint64_t file_size = fs::file_size(path, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot stat " + path.string());

  char magic[4];
  if (!in.read(magic, 4)) fail(ErrorCode::kTruncatedFile, "file shorter than magic");
  if (std::memcmp(magic, kIndexMagic, 4) != 0) {
    fail(ErrorCode::kBadMagic, path.string() + " is not a PKIX index");
  }
  const auto version = io::read_le<std::uint16_t>(in);
  if (version != kIndexVersion) {
    fail(ErrorCode::kVersionUnsupported, "PKIX version " + std::to_string(version));
  }
  const auto field_tag = io::read_le<std::uint8_t>(in);
  const auto kind_tag = io::read_le<std::uint8_t>(in);
  const auto dim = io::read_le<std::uint32_t>(in);
  const auto count = io::read_le<std::uint64_t>(in);
  const auto n_clusters = io::read_le<std::uint32_t>(in);
  const auto n_probe = io::read_le<std::uint32_t>(in);

  if (field_tag > 2 || kind_tag > 1) fail(ErrorCode::kCorruptIndex, "unknown field or kind tag");
  if (dim == 0 || count == 0) fail(ErrorCode::kCorruptIndex, "zero dim or empty index");
  const bool clustered = kind_tag == 1;
  if (n_clusters == 0 || n_probe == 0 || n_probe > n_clusters || n_clusters > count ||
      (!clustered && (n_clusters != 1 || n_probe != 1))) {
    fail(ErrorCode::kCorruptIndex, "inconsistent cluster parameters");
  }
  const std::uint64_t stride = 8 + 4ull * dim;
  const std::uint64_t remaining = file_size - kIndexHeaderSize;
  if (count > remaining / stride) {
    fail(ErrorCode::kTruncatedFile, "index declares more rows than the file holds");
  }
  if (clustered) {
    const std::uint64_t fixed = count * stride + 4ull * dim * n_clusters + 8ull * n_clusters;
    if (fixed + 8 * count != remaining) {
      fail(ErrorCode::kTruncatedFile, "index payload size does not match header");
    }
  } else if (count * stride != remaining) {
    fail(ErrorCode::kTruncatedFile, "index payload size does not match header");
  }

  VectorIndex index;
  index.field_ = static_cast<Field>(field_tag);
  index.kind_ = static_cast<IndexKind>(kind_tag);
  index.dim_ = dim;
  index.n_probe_ = n_probe;
  index.score_scale_ = scale_for(index.field_);
  index.ids_.resize(count);
  index.rows_.resize(count * dim);
  std::unordered_map<EntryId, std::uint32_t> position_of;
  position_of.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    index.ids_[i] = io::read_le<std::uint64_t>(in);
    io::read_f32s(in, {index.rows_.data() + i * dim, dim});
    if (!position_of.emplace(index.ids_[i], static_cast<std::uint32_t>(i)).second) {
      fail(ErrorCode::kCorruptIndex, "duplicate id " + std::to_string(index.ids_[i]));
    }
  }
  for (float v : index.rows_) {
    if (!std::isfinite(v)) fail(ErrorCode::kCorruptIndex, "non-finite vector value");
  }

  if (!clustered) {
    std::vector<std::uint32_t> all(count);
    std::iota(all.begin(), all.end(), 0u);
    index.posting_.push_back(std::move(all));
    return index;
  }

  index.centroids_.resize(static_cast<std::size_t>(n_clusters) * dim);
  io::read_f32s(in, index.centroids_);
  for (float v : index.centroids_) {
    if (!std::isfinite(v)) fail(ErrorCode::kCorruptIndex, "non-finite centroid value");
  }
  std::vector<bool> seen(count, false);
  std::uint64_t total = 0;
  index.posting_.resize(n_clusters);
  for (auto& list : index.posting_) {
    const auto length = io::read_le<std::uint64_t>(in);
    if (length > count - total) fail(ErrorCode::kCorruptIndex, "posting lists exceed row count");
    total += length;
    list.reserve(length);
    for (std::uint64_t j = 0; j < length; ++j) {
      const auto id = io::read_le<std::uint64_t>(in);
      auto it = position_of.find(id);
      if (it == position_of.end() || seen[it->second]) {
        fail(ErrorCode::kCorruptIndex, "posting list id " + std::to_string(id) +
                                           " unknown or repeated");
      }
      seen[it->second] = true;
      list.push_back(it->second);
    }
  }
  if (total != count) fail(ErrorCode::kCorruptIndex, "posting lists do not cover every row");
  return index;
}

}  // namespace pairkb
