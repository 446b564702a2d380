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

// JSON helpers shared by the CLI and the HTTP service.

#include <optional>
#include <string_view>

#include "json.hpp"
#include "pairkb/core.h"
#include "pairkb/index.h"

namespace pairkb::json_io {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

// {"id","s_audio","s_text"?,"s_fused","caption","audio_uri"}
ordered_json hit_json(const ScoredHit& hit, const KnowledgeBase& kb);
ordered_json hits_json(const std::vector<ScoredHit>& hits, const KnowledgeBase& kb);
ordered_json topk_json(const TopKResult& result);
ordered_json entry_json(const PairEntry& e);

// Array of finite numbers -> Embedding. Throws kInvalidArgument / kNonFinite.
Embedding embedding_from(const json& value, std::string_view what);
std::vector<EntryId> ids_from(const json& value, std::string_view what);

}  // namespace pairkb::json_io
