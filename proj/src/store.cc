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

#include "pairkb/store.h"

#include <fstream>
#include <map>

#include "json.hpp"
#include "pairkb/binary_io.h"

namespace pairkb {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

fs::path metadata_path_for(const fs::path& store_path) {
  fs::path p = store_path;
  p.replace_extension(".meta.jsonl");
  return p;
}

namespace {

struct MetaRecord {
  std::string caption;
  std::string audio_uri;
  std::string source;
};

std::map<EntryId, MetaRecord> read_metadata(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open metadata file " + path.string());
  std::map<EntryId, MetaRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object() || !obj.contains("id") ||
        !obj["id"].is_number_unsigned()) {
      fail(ErrorCode::kMetadataMismatch, "malformed metadata line at " + where);
    }
    MetaRecord rec;
    try {
      rec.caption = obj.value("caption", std::string());
      rec.audio_uri = obj.value("audio_uri", std::string());
      rec.source = obj.value("source", std::string());
    } catch (const json::exception&) {
      fail(ErrorCode::kMetadataMismatch, "non-string metadata field at " + where);
    }
    const auto id = obj["id"].get<EntryId>();
    if (!out.emplace(id, std::move(rec)).second) {
      fail(ErrorCode::kMetadataMismatch, "duplicate id " + std::to_string(id) + " at " + where);
    }
  }
  return out;
}

}  // namespace

KnowledgeBase load_embedding_store(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open embedding store " + path.string());

  char magic[4];
  if (!in.read(magic, 4)) fail(ErrorCode::kTruncatedFile, "file shorter than magic");
  if (std::memcmp(magic, kStoreMagic, 4) != 0) {
    fail(ErrorCode::kBadMagic, path.string() + " is not a PKB1 store");
  }
  const auto version = io::read_le<std::uint16_t>(in);
  if (version != kStoreVersion) {
    fail(ErrorCode::kVersionUnsupported, "PKB1 version " + std::to_string(version));
  }
  const auto flags = io::read_le<std::uint16_t>(in);
  const auto audio_dim = io::read_le<std::uint32_t>(in);
  const auto text_dim = io::read_le<std::uint32_t>(in);
  const auto count = io::read_le<std::uint64_t>(in);
  if (audio_dim == 0 || text_dim == 0) {
    fail(ErrorCode::kInvalidArgument, "PKB1 header declares a zero dimension");
  }

  // Validate the declared size against the file before allocating anything.
  std::error_code ec;
  const auto file_size = fs::file_size(path, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot stat " + path.string());
  const std::uint64_t stride = 8 + 4 * (static_cast<std::uint64_t>(audio_dim) + text_dim);
  const std::uint64_t payload = file_size - kStoreHeaderSize;
  if (count > payload / stride) {
    fail(ErrorCode::kTruncatedFile, "header declares " + std::to_string(count) +
                                        " records but file holds " +
                                        std::to_string(payload / stride));
  }
  if (count * stride != payload) {
    fail(ErrorCode::kTruncatedFile, "trailing bytes after " + std::to_string(count) + " records");
  }

  const auto meta = read_metadata(metadata_path_for(path));
  if (meta.size() != count) {
    fail(ErrorCode::kMetadataMismatch, "metadata has " + std::to_string(meta.size()) +
                                           " records, store has " + std::to_string(count));
  }

  std::vector<PairEntry> entries;
  entries.reserve(count);
  // Dims are only trusted once a record proves they fit in the file.
  std::vector<float> audio(count ? audio_dim : 0), text(count ? text_dim : 0);
  for (std::uint64_t r = 0; r < count; ++r) {
    PairEntry e;
    e.id = io::read_le<std::uint64_t>(in);
    io::read_f32s(in, audio);
    io::read_f32s(in, text);
    auto it = meta.find(e.id);
    if (it == meta.end()) {
      fail(ErrorCode::kMetadataMismatch, "id " + std::to_string(e.id) + " missing from metadata");
    }
    e.audio = Embedding(audio);
    e.text = Embedding(text);
    e.caption = it->second.caption;
    e.audio_uri = it->second.audio_uri;
    e.source = it->second.source;
    entries.push_back(std::move(e));
  }

  const Ingest ingest = (flags & 1u) ? Ingest::kValidate : Ingest::kNormalize;
  return KnowledgeBase(path.stem().string(), audio_dim, text_dim, std::move(entries), ingest);
}

void save_embedding_store(const KnowledgeBase& kb, const fs::path& path) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
    out.write(kStoreMagic, 4);
    io::write_le<std::uint16_t>(out, kStoreVersion);
    io::write_le<std::uint16_t>(out, 1);
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(kb.schema().audio_dim));
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(kb.schema().text_dim));
    io::write_le<std::uint64_t>(out, kb.size());
    for (const auto& e : kb.entries()) {
      io::write_le<std::uint64_t>(out, e.id);
      io::write_f32s(out, e.audio.values());
      io::write_f32s(out, e.text.values());
    }
    if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
  }
  const auto meta_path = metadata_path_for(path);
  std::ofstream meta(meta_path, std::ios::trunc);
  if (!meta) fail(ErrorCode::kIoError, "cannot write " + meta_path.string());
  for (const auto& e : kb.entries()) {
    json line = {{"id", e.id}, {"caption", e.caption}, {"audio_uri", e.audio_uri},
                 {"source", e.source}};
    meta << line.dump() << '\n';
  }
  if (!meta) fail(ErrorCode::kIoError, "write failed for " + meta_path.string());
}

}  // namespace pairkb
