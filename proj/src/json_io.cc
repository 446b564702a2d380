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

#include "json_io.h"

#include <cmath>

namespace pairkb::json_io {

ordered_json hit_json(const ScoredHit& hit, const KnowledgeBase& kb) {
  const auto& e = kb.entry(hit.entry_id);
  ordered_json out;
  out["id"] = hit.entry_id;
  out["s_audio"] = hit.s_audio;
  if (hit.s_text) out["s_text"] = *hit.s_text;
  out["s_fused"] = hit.s_fused;
  out["caption"] = e.caption;
  out["audio_uri"] = e.audio_uri;
  return out;
}

ordered_json hits_json(const std::vector<ScoredHit>& hits, const KnowledgeBase& kb) {
  ordered_json arr = ordered_json::array();
  for (const auto& h : hits) arr.push_back(hit_json(h, kb));
  return arr;
}

ordered_json topk_json(const TopKResult& result) {
  ordered_json arr = ordered_json::array();
  for (const auto& h : result.hits) arr.push_back({{"id", h.id}, {"score", h.score}});
  return arr;
}

ordered_json entry_json(const PairEntry& e) {
  ordered_json out;
  out["id"] = e.id;
  out["caption"] = e.caption;
  out["audio_uri"] = e.audio_uri;
  out["source"] = e.source;
  return out;
}

Embedding embedding_from(const json& value, std::string_view what) {
  if (!value.is_array() || value.empty()) {
    fail(ErrorCode::kInvalidArgument, std::string(what) + " must be a non-empty array of numbers");
  }
  std::vector<float> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_number()) {
      fail(ErrorCode::kInvalidArgument, std::string(what) + " must contain only numbers");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(ErrorCode::kNonFinite, std::string(what) + " has a non-finite value");
    out.push_back(static_cast<float>(d));
  }
  return Embedding(std::move(out));
}

std::vector<EntryId> ids_from(const json& value, std::string_view what) {
  if (!value.is_array()) fail(ErrorCode::kInvalidArgument, std::string(what) + " must be an array");
  std::vector<EntryId> out;
  for (const auto& v : value) {
    if (!v.is_number_unsigned()) {
      fail(ErrorCode::kInvalidArgument, std::string(what) + " must hold unsigned integers");
    }
    out.push_back(v.get<EntryId>());
  }
  return out;
}

}  // namespace pairkb::json_io
