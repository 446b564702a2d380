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

#include "pairkb/core.h"

#include <cmath>

namespace pairkb {

Embedding::Embedding(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) fail(ErrorCode::kInvalidArgument, "embedding must have dim >= 1");
  for (float v : values_) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, "embedding contains NaN or Inf");
  }
}

double Embedding::norm() const noexcept {
  double sum = 0.0;
  for (float v : values_) sum += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(sum);
}

bool Embedding::is_unit(double tolerance) const noexcept {
  return std::abs(norm() - 1.0) <= tolerance;
}

Embedding l2_normalize(const Embedding& v) {
  const double n = v.norm();
  if (n == 0.0) fail(ErrorCode::kZeroVector, "cannot normalize a zero vector");
  std::vector<float> out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(v[i]) / n);
  }
  return Embedding(std::move(out));
}

double dot(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    fail(ErrorCode::kDimMismatch,
         "dim " + std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sum += static_cast<double>(u[i]) * static_cast<double>(v[i]);
  }
  return sum;
}

double dot(const Embedding& u, const Embedding& v) { return dot(u.values(), v.values()); }

bool is_valid_utf8(std::string_view text) noexcept {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= text.size()) return false;
    for (std::size_t j = 1; j <= extra; ++j) {
      const auto cc = static_cast<unsigned char>(text[i + j]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

namespace {

Embedding ingest_embedding(const Embedding& v, std::size_t expected_dim, Ingest ingest,
                           EntryId id, const char* what) {
  if (v.dim() != expected_dim) {
    fail(ErrorCode::kDimMismatch, std::string(what) + " embedding of entry " +
                                      std::to_string(id) + " has dim " +
                                      std::to_string(v.dim()) + ", schema says " +
                                      std::to_string(expected_dim));
  }
  if (ingest == Ingest::kNormalize) return l2_normalize(v);
  if (!v.is_unit()) {
    fail(ErrorCode::kNotNormalized, std::string(what) + " embedding of entry " +
                                        std::to_string(id) + " is flagged normalized but has norm " +
                                        std::to_string(v.norm()));
  }
  return v;
}

}  // namespace

KnowledgeBase::KnowledgeBase(std::string name, std::size_t audio_dim, std::size_t text_dim,
                             std::vector<PairEntry> entries, Ingest ingest)
    : name_(std::move(name)), schema_{audio_dim, text_dim, true}, entries_(std::move(entries)) {
  if (audio_dim == 0 || text_dim == 0) {
    fail(ErrorCode::kInvalidArgument, "knowledge base dims must be positive");
  }
  positions_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& e = entries_[i];
    if (!positions_.emplace(e.id, i).second) {
      fail(ErrorCode::kDuplicateId, "duplicate entry id " + std::to_string(e.id));
    }
    if (e.caption.empty()) {
      fail(ErrorCode::kEmptyCaption, "entry " + std::to_string(e.id) + " has an empty caption");
    }
    if (!is_valid_utf8(e.caption)) {
      fail(ErrorCode::kInvalidUtf8, "caption of entry " + std::to_string(e.id) + " is not UTF-8");
    }
    e.audio = ingest_embedding(e.audio, audio_dim, ingest, e.id, "audio");
    e.text = ingest_embedding(e.text, text_dim, ingest, e.id, "text");
  }
}

std::optional<std::size_t> KnowledgeBase::position_of(EntryId id) const {
  auto it = positions_.find(id);
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

const PairEntry& KnowledgeBase::entry(EntryId id) const {
  auto it = positions_.find(id);
  if (it == positions_.end()) {
    fail(ErrorCode::kUnknownEntryId, "no entry with id " + std::to_string(id));
  }
  return entries_[it->second];
}

const PairEntry* KnowledgeBase::find_by_audio_uri(std::string_view uri) const {
  for (const auto& e : entries_) {
    if (e.audio_uri == uri) return &e;
  }
  return nullptr;
}

KnowledgeBase KnowledgeBase::subset(const IdSet& ids, std::string name) const {
  std::vector<PairEntry> kept;
  kept.reserve(ids.size());
  for (const auto& e : entries_) {
    if (ids.contains(e.id)) kept.push_back(e);
  }
  return KnowledgeBase(std::move(name), schema_.audio_dim, schema_.text_dim, std::move(kept),
                       Ingest::kValidate);
}

}  // namespace pairkb
