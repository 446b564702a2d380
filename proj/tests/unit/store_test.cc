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

#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "pairkb/fixture.h"
#include "test_support.h"

namespace pairkb {
namespace {

using testing::code_of;
using testing::read_bytes;
using testing::ScratchDir;
using testing::write_bytes;

// Hand-rolled little-endian encoder, kept separate from the library's.
struct Bytes {
  std::string data;
  template <typename T>
  Bytes& le(T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      data.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
    }
    return *this;
  }
  Bytes& f32(float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    return le(bits);
  }
  Bytes& raw(std::string_view s) {
    data.append(s);
    return *this;
  }
};

std::string toy_store_bytes(std::uint16_t flags = 1) {
  Bytes b;
  b.raw("PKB1").le<std::uint16_t>(1).le<std::uint16_t>(flags).le<std::uint32_t>(2).le<std::uint32_t>(2).le<std::uint64_t>(1);
  b.le<std::uint64_t>(9).f32(1.0f).f32(0.0f).f32(0.0f).f32(1.0f);
  return b.data;
}

void write_meta(const std::filesystem::path& store, const std::string& lines) {
  write_bytes(metadata_path_for(store), lines);
}

TEST(StoreTest, MetadataPathSitsNextToStore) {
  EXPECT_EQ(metadata_path_for("/d/toy.pkb"), std::filesystem::path("/d/toy.meta.jsonl"));
}

TEST(StoreTest, WritesDocumentedLayout) {
  ScratchDir dir("store");
  std::vector<PairEntry> entries;
  PairEntry e;
  e.id = 9;
  e.audio = Embedding{1.0f, 0.0f};
  e.text = Embedding{0.0f, 1.0f};
  e.caption = "a";
  entries.push_back(e);
  save_embedding_store(KnowledgeBase("x", 2, 2, std::move(entries)), dir / "x.pkb");
  EXPECT_EQ(read_bytes(dir / "x.pkb"), toy_store_bytes());
  EXPECT_EQ(read_bytes(dir / "x.meta.jsonl"),
            "{\"id\":9,\"caption\":\"a\",\"audio_uri\":\"\",\"source\":\"\"}\n");
}

TEST(StoreTest, ReadsHandBuiltFile) {
  ScratchDir dir("store");
  write_bytes(dir / "hand.pkb", toy_store_bytes());
  write_meta(dir / "hand.pkb", "{\"id\":9,\"caption\":\"bell\",\"audio_uri\":\"u\",\"source\":\"s\"}\n");
  const auto kb = load_embedding_store(dir / "hand.pkb");
  EXPECT_EQ(kb.name(), "hand");
  ASSERT_EQ(kb.size(), 1u);
  EXPECT_EQ(kb.entry(9).caption, "bell");
  EXPECT_EQ(kb.entry(9).audio_uri, "u");
  EXPECT_EQ(kb.entry(9).source, "s");
  EXPECT_EQ(kb.entry(9).text, (Embedding{0.0f, 1.0f}));
}

TEST(StoreTest, UnnormalizedFlagNormalizesOnLoad) {
  ScratchDir dir("store");
  Bytes b;
  b.raw("PKB1").le<std::uint16_t>(1).le<std::uint16_t>(0).le<std::uint32_t>(2).le<std::uint32_t>(2).le<std::uint64_t>(1);
  b.le<std::uint64_t>(1).f32(3.0f).f32(4.0f).f32(0.0f).f32(2.0f);
  write_bytes(dir / "raw.pkb", b.data);
  write_meta(dir / "raw.pkb", "{\"id\":1,\"caption\":\"c\"}\n");
  const auto kb = load_embedding_store(dir / "raw.pkb");
  EXPECT_NEAR(kb.entry(1).audio[0], 0.6, 1e-7);
  EXPECT_TRUE(kb.entry(1).text.is_unit());

  // The same payload flagged normalized is rejected.
  b.data[6] = 1;
  write_bytes(dir / "raw.pkb", b.data);
  EXPECT_EQ(code_of([&] { load_embedding_store(dir / "raw.pkb"); }), ErrorCode::kNotNormalized);
}

TEST(StoreTest, RoundTripIsBitExact) {
  ScratchDir dir("store");
  CorpusParams p;
  p.n = 300;
  p.audio_dim = 12;
  p.text_dim = 7;
  p.seed = 3;
  const auto kb = generate_corpus(p);
  save_embedding_store(kb, dir / "c.pkb");
  const auto back = load_embedding_store(dir / "c.pkb");
  ASSERT_EQ(back.size(), kb.size());
  EXPECT_EQ(back.schema(), kb.schema());
  for (std::size_t i = 0; i < kb.size(); ++i) {
    const auto& a = kb.at(i);
    const auto& b = back.at(i);
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(std::memcmp(a.audio.values().data(), b.audio.values().data(), 12 * 4), 0);
    EXPECT_EQ(std::memcmp(a.text.values().data(), b.text.values().data(), 7 * 4), 0);
    EXPECT_EQ(a.caption, b.caption);
    EXPECT_EQ(a.audio_uri, b.audio_uri);
    EXPECT_EQ(a.source, b.source);
  }
  // Saving what was loaded reproduces the same bytes.
  save_embedding_store(back, dir / "d.pkb");
  EXPECT_EQ(read_bytes(dir / "c.pkb"), read_bytes(dir / "d.pkb"));
  EXPECT_EQ(read_bytes(dir / "c.meta.jsonl"), read_bytes(dir / "d.meta.jsonl"));
}

TEST(StoreTest, EmptyStoreRoundTrips) {
  ScratchDir dir("store");
  save_embedding_store(KnowledgeBase("e", 3, 5, {}), dir / "e.pkb");
  const auto back = load_embedding_store(dir / "e.pkb");
  EXPECT_TRUE(back.empty());
  EXPECT_EQ(back.schema().audio_dim, 3u);
  EXPECT_EQ(back.schema().text_dim, 5u);
}

TEST(StoreTest, TypedErrors) {
  ScratchDir dir("store");
  const auto path = dir / "t.pkb";
  write_meta(path, "{\"id\":9,\"caption\":\"a\"}\n");
  const auto good = toy_store_bytes();
  auto load = [&] { load_embedding_store(path); };

  EXPECT_EQ(code_of([&] { load_embedding_store(dir / "missing.pkb"); }), ErrorCode::kIoError);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  write_bytes(path, bad_magic);
  EXPECT_EQ(code_of(load), ErrorCode::kBadMagic);

  auto bad_version = good;
  bad_version[4] = 2;
  write_bytes(path, bad_version);
  EXPECT_EQ(code_of(load), ErrorCode::kVersionUnsupported);

  write_bytes(path, good.substr(0, 10));
  EXPECT_EQ(code_of(load), ErrorCode::kTruncatedFile);
  write_bytes(path, good.substr(0, good.size() - 1));
  EXPECT_EQ(code_of(load), ErrorCode::kTruncatedFile);
  write_bytes(path, good + "x");
  EXPECT_EQ(code_of(load), ErrorCode::kTruncatedFile);

  auto huge_count = good;
  huge_count[23] = 0x7f;
  write_bytes(path, huge_count);
  EXPECT_EQ(code_of(load), ErrorCode::kTruncatedFile);

  auto nan_payload = good;
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan_payload.data() + 32, &nan, 4);
  write_bytes(path, nan_payload);
  EXPECT_EQ(code_of(load), ErrorCode::kNonFinite);

  write_bytes(path, good);
  write_meta(path, "{\"id\":8,\"caption\":\"a\"}\n");
  EXPECT_EQ(code_of(load), ErrorCode::kMetadataMismatch);
  write_meta(path, "{\"id\":9,\"caption\":\"a\"}\n{\"id\":9,\"caption\":\"b\"}\n");
  EXPECT_EQ(code_of(load), ErrorCode::kMetadataMismatch);
  write_meta(path, "not json\n");
  EXPECT_EQ(code_of(load), ErrorCode::kMetadataMismatch);
  write_meta(path, "{\"id\":9,\"caption\":5}\n");
  EXPECT_EQ(code_of(load), ErrorCode::kMetadataMismatch);
  write_meta(path, "{\"id\":9,\"caption\":\"\"}\n");
  EXPECT_EQ(code_of(load), ErrorCode::kEmptyCaption);
  std::filesystem::remove(metadata_path_for(path));
  EXPECT_EQ(code_of(load), ErrorCode::kIoError);
}

TEST(StoreTest, MutatedFilesOnlyRaiseTypedErrors) {
  ScratchDir dir("store");
  const auto kb = generate_corpus({20, 4, 3, 9, 0.5, 1, "fz"});
  save_embedding_store(kb, dir / "src.pkb");
  const auto original = read_bytes(dir / "src.pkb");
  const auto meta = read_bytes(dir / "src.meta.jsonl");
  std::mt19937_64 rng(1234);
  int typed = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto bytes = original;
    switch (trial % 4) {
      case 0:  // flip random bytes
        for (int f = 0; f < 1 + trial % 5; ++f) {
          bytes[rng() % bytes.size()] = static_cast<char>(rng());
        }
        break;
      case 1:  // truncate
        bytes.resize(rng() % bytes.size());
        break;
      case 2:  // extend with junk
        for (int f = 0; f < 1 + trial % 9; ++f) bytes.push_back(static_cast<char>(rng()));
        break;
      default:  // corrupt the header only
        bytes[rng() % kStoreHeaderSize] = static_cast<char>(rng());
        break;
    }
    const auto path = dir / ("m" + std::to_string(trial) + ".pkb");
    write_bytes(path, bytes);
    write_bytes(metadata_path_for(path), meta);
    try {
      load_embedding_store(path);
    } catch (const Error&) {
      ++typed;
    } catch (const std::exception& e) {
      ADD_FAILURE() << "untyped exception on trial " << trial << ": " << e.what();
    }
    std::filesystem::remove(path);
    std::filesystem::remove(metadata_path_for(path));
  }
  EXPECT_GT(typed, 500);
}

}  // namespace
}  // namespace pairkb
