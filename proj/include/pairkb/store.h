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

// PKB1 embedding store.
//
//   offset  size  field
//   0       4     magic "PKB1"
//   4       2     version (1)
//   6       2     flags (bit 0: payload already L2-normalized)
//   8       4     d_A
//   12      4     d_T
//   16      8     record count
//   24      ...   records: [u64 id][d_A x f32 audio][d_T x f32 text]
//
// All integers and floats little-endian. Captions and locators live in a
// sibling "<stem>.meta.jsonl" file, one {"id","caption","audio_uri","source"}
// object per line.

#include <filesystem>

#include "pairkb/core.h"

namespace pairkb {

inline constexpr char kStoreMagic[4] = {'P', 'K', 'B', '1'};
inline constexpr std::uint16_t kStoreVersion = 1;
inline constexpr std::size_t kStoreHeaderSize = 24;

std::filesystem::path metadata_path_for(const std::filesystem::path& store_path);

// Errors: kIoError, kBadMagic, kVersionUnsupported, kTruncatedFile,
// kMetadataMismatch, plus embedding/KB validation errors.
KnowledgeBase load_embedding_store(const std::filesystem::path& path);

// Writes the store and its metadata sibling. Flags are always "normalized".
void save_embedding_store(const KnowledgeBase& kb, const std::filesystem::path& path);

}  // namespace pairkb
