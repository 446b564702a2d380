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

#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <set>

#include "pairkb/fixture.h"
#include "test_support.h"

namespace pairkb {
namespace {

using testing::code_of;
using testing::ids_of;
using testing::read_bytes;
using testing::ScratchDir;
using testing::write_bytes;

TEST(FieldTest, NamesRoundTrip) {
  for (auto f : {Field::kAudio, Field::kText, Field::kPairConcat}) {
    EXPECT_EQ(parse_field(field_name(f)), f);
  }
  EXPECT_FALSE(parse_field("video").has_value());
}

TEST(FlatIndexTest, ToyAudioSearch) {
  const auto kb = toy_kb();
  const auto index = build_flat(kb, Field::kAudio);
  const auto top = search_topk(index, Embedding{1.0f, 0.0f}, 3);
  ASSERT_EQ(top.hits.size(), 3u);
  EXPECT_EQ(ids_of(top.hits), (std::vector<EntryId>{1, 3, 2}));
  EXPECT_DOUBLE_EQ(top.hits[0].score, 1.0);
  EXPECT_NEAR(top.hits[1].score, 0.8, 1e-7);
  EXPECT_DOUBLE_EQ(top.hits[2].score, 0.0);
}

TEST(FlatIndexTest, PairConcatScoresAreCosines) {
  const auto kb = toy_kb();
  const auto index = build_flat(kb, Field::kPairConcat);
  EXPECT_EQ(index.dim(), 4u);
  const auto top = search_topk(index, Embedding{1.0f, 0.0f, 1.0f, 0.0f}, 3);
  EXPECT_EQ(ids_of(top.hits), (std::vector<EntryId>{1, 3, 2}));
  EXPECT_DOUBLE_EQ(top.hits[0].score, 1.0);
  EXPECT_NEAR(top.hits[1].score, 0.7, 1e-7);
  EXPECT_DOUBLE_EQ(top.hits[2].score, 0.0);
}

TEST(FlatIndexTest, TiesBreakByAscendingId) {
  std::vector<PairEntry> entries;
  for (EntryId id : {40u, 10u, 30u, 20u}) {
    PairEntry e;
    e.id = id;
    e.audio = Embedding{1.0f, 0.0f};
    e.text = Embedding{0.0f, 1.0f};
    e.caption = "same";
    entries.push_back(e);
  }
  const KnowledgeBase kb("ties", 2, 2, std::move(entries));
  const auto index = build_flat(kb, Field::kAudio);
  EXPECT_EQ(ids_of(search_topk(index, Embedding{1.0f, 0.0f}, 3).hits),
            (std::vector<EntryId>{10, 20, 30}));
}

TEST(FlatIndexTest, ExcludeKClippingAndErrors) {
  const auto kb = toy_kb();
  const auto index = build_flat(kb, Field::kAudio);
  const IdSet exclude{1};
  EXPECT_EQ(ids_of(search_topk(index, Embedding{1.0f, 0.0f}, 10, &exclude).hits),
            (std::vector<EntryId>{3, 2}));
  EXPECT_EQ(search_topk(index, Embedding{1.0f, 0.0f}, 99).hits.size(), 3u);
  EXPECT_EQ(code_of([&] { search_topk(index, Embedding{1.0f, 0.0f}, 0); }), ErrorCode::kInvalidK);
  EXPECT_EQ(code_of([&] { search_topk(index, Embedding{1.0f, 0.0f, 0.0f}, 1); }),
            ErrorCode::kDimMismatch);
  EXPECT_EQ(code_of([] { build_flat(KnowledgeBase("e", 2, 2, {}), Field::kAudio); }),
            ErrorCode::kEmptyKB);
}

TEST(FlatIndexTest, MatchesBruteForceOracle) {
  const auto kb = testing::random_kb(500, 16, 8, 21);
  const auto index = build_flat(kb, Field::kAudio);
  std::mt19937_64 rng(99);
  for (int q = 0; q < 50; ++q) {
    const auto query = testing::random_unit(rng, 16);
    const auto got = index.search(query, 10);
    const auto want = testing::oracle_audio_rank(kb, query, 10);
    ASSERT_EQ(ids_of(got.hits), ids_of(want));
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_NEAR(got.hits[i].score, want[i].score, 1e-6);
    }
  }
}

TEST(ClusteredIndexTest, ParameterValidation) {
  const auto kb = toy_kb();
  EXPECT_EQ(code_of([&] { build_clustered(kb, Field::kAudio, {0, 1, 1, 25}); }),
            ErrorCode::kBadClusterCount);
  EXPECT_EQ(code_of([&] { build_clustered(kb, Field::kAudio, {4, 1, 1, 25}); }),
            ErrorCode::kBadClusterCount);
  EXPECT_EQ(code_of([&] { build_clustered(kb, Field::kAudio, {2, 3, 1, 25}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { build_clustered(KnowledgeBase("e", 2, 2, {}), Field::kAudio, {}); }),
            ErrorCode::kEmptyKB);
}

TEST(ClusteredIndexTest, PostingListsPartitionTheRows) {
  const auto kb = testing::random_kb(400, 16, 16, 8);
  const auto index = build_clustered(kb, Field::kText, {12, 3, 5, 25});
  EXPECT_EQ(index.n_clusters(), 12u);
  std::set<EntryId> seen;
  std::size_t total = 0;
  for (const auto& list : index.posting_lists()) {
    total += list.size();
    seen.insert(list.begin(), list.end());
  }
  EXPECT_EQ(total, kb.size());
  EXPECT_EQ(seen.size(), kb.size());
  for (std::size_t c = 0; c < index.n_clusters(); ++c) {
    EXPECT_NEAR(testing::oracle_dot(index.centroid(c), index.centroid(c)), 1.0, 1e-5);
  }
}

TEST(ClusteredIndexTest, FullProbeEqualsFlat) {
  const auto kb = testing::random_kb(600, 16, 16, 33);
  const auto flat = build_flat(kb, Field::kAudio);
  const auto clustered = build_clustered(kb, Field::kAudio, {10, 2, 7, 25});
  std::mt19937_64 rng(4);
  for (int q = 0; q < 40; ++q) {
    const auto query = testing::random_unit(rng, 16);
    EXPECT_EQ(clustered.search(query, 10, nullptr, 10), flat.search(query, 10));
  }
}

TEST(ClusteredIndexTest, DeterministicUnderSeed) {
  const auto kb = testing::random_kb(300, 8, 8, 1);
  const auto a = build_clustered(kb, Field::kAudio, {8, 2, 42, 25});
  const auto b = build_clustered(kb, Field::kAudio, {8, 2, 42, 25});
  EXPECT_EQ(a.posting_lists(), b.posting_lists());
}

TEST(ClusteredIndexTest, SingleClusterAndAllClusters) {
  const auto kb = testing::random_kb(50, 4, 4, 2);
  const auto flat = build_flat(kb, Field::kAudio);
  const auto one = build_clustered(kb, Field::kAudio, {1, 1, 1, 25});
  const auto every = build_clustered(kb, Field::kAudio, {50, 50, 1, 25});
  const std::vector<float> q{0.5f, 0.5f, 0.5f, 0.5f};
  EXPECT_EQ(one.search(q, 7), flat.search(q, 7));
  EXPECT_EQ(every.search(q, 7), flat.search(q, 7));
}

TEST(IndexFileTest, RoundTripIsBitExact) {
  ScratchDir dir("index");
  const auto kb = testing::random_kb(120, 6, 5, 17);
  for (auto field : {Field::kAudio, Field::kText, Field::kPairConcat}) {
    for (bool clustered : {false, true}) {
      const auto index =
          clustered ? build_clustered(kb, field, {6, 2, 3, 25}) : build_flat(kb, field);
      const auto path = dir / "i.pkix";
      save_index(index, path);
      const auto back = load_index(path);
      EXPECT_EQ(back.field(), field);
      EXPECT_EQ(back.kind(), index.kind());
      EXPECT_EQ(back.dim(), index.dim());
      EXPECT_EQ(back.n_probe(), index.n_probe());
      EXPECT_EQ(back.ids(), index.ids());
      for (std::size_t i = 0; i < index.size(); ++i) {
        ASSERT_EQ(std::memcmp(back.row(i).data(), index.row(i).data(), index.dim() * 4), 0);
      }
      EXPECT_EQ(back.posting_lists(), index.posting_lists());
      save_index(back, dir / "j.pkix");
      EXPECT_EQ(read_bytes(path), read_bytes(dir / "j.pkix"));
      const std::vector<float> q(index.dim(), 0.25f);
      EXPECT_EQ(back.search(q, 5), index.search(q, 5));
    }
  }
}

TEST(IndexFileTest, TypedErrors) {
  ScratchDir dir("index");
  const auto path = dir / "t.pkix";
  save_index(build_clustered(toy_kb(), Field::kAudio, {2, 1, 1, 25}), path);
  const auto good = read_bytes(path);
  auto load = [&] { load_index(path); };

  EXPECT_EQ(code_of([&] { load_index(dir / "missing.pkix"); }), ErrorCode::kIoError);
  auto bytes = good;
  bytes[3] = 'Y';
  write_bytes(path, bytes);
  EXPECT_EQ(code_of(load), ErrorCode::kBadMagic);
  bytes = good;
  bytes[4] = 9;
  write_bytes(path, bytes);
  EXPECT_EQ(code_of(load), ErrorCode::kVersionUnsupported);
  bytes = good;
  bytes[6] = 7;  // field tag
  write_bytes(path, bytes);
  EXPECT_EQ(code_of(load), ErrorCode::kCorruptIndex);
  write_bytes(path, good.substr(0, 20));
  EXPECT_EQ(code_of(load), ErrorCode::kTruncatedFile);
  write_bytes(path, good.substr(0, good.size() - 3));
  EXPECT_EQ(code_of(load), ErrorCode::kTruncatedFile);
  write_bytes(path, good + "zz");
  EXPECT_EQ(code_of(load), ErrorCode::kTruncatedFile);
  // Posting list pointing at an id that is not a row.
  bytes = good;
  bytes[bytes.size() - 1] = 0x55;
  write_bytes(path, bytes);
  EXPECT_EQ(code_of(load), ErrorCode::kCorruptIndex);
}

TEST(IndexFileTest, MutatedFilesOnlyRaiseTypedErrors) {
  ScratchDir dir("index");
  const auto path = dir / "src.pkix";
  save_index(build_clustered(testing::random_kb(30, 4, 4, 6), Field::kAudio, {4, 2, 1, 25}), path);
  const auto original = read_bytes(path);
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    auto bytes = original;
    switch (trial % 3) {
      case 0:
        for (int f = 0; f < 1 + trial % 4; ++f) bytes[rng() % bytes.size()] = static_cast<char>(rng());
        break;
      case 1:
        bytes.resize(rng() % bytes.size());
        break;
      default:
        bytes[rng() % 32] = static_cast<char>(rng());
        break;
    }
    write_bytes(path, bytes);
    try {
      const auto index = load_index(path);
      const std::vector<float> q(index.dim(), 0.5f);
      index.search(q, 3);
    } catch (const Error&) {
    } catch (const std::exception& e) {
      ADD_FAILURE() << "untyped exception on trial " << trial << ": " << e.what();
    }
  }
}

}  // namespace
}  // namespace pairkb
