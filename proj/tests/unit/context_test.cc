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

#include "pairkb/context.h"

#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "json.hpp"
#include "pairkb/fixture.h"
#include "test_support.h"

namespace pairkb {
namespace {

using testing::code_of;

std::vector<ScoredHit> toy_hits() {
  const auto kb = toy_kb();
  RetrievalQuery q;
  q.audio = Embedding{1.0f, 0.0f};
  q.text = Embedding{0.0f, 1.0f};
  return retrieve_exhaustive(kb, Strategy::pair_to_pair(0.5), q, 3);
}

TEST(ContextTest, MostSimilarSitsNextToQuery) {
  const auto kb = toy_kb();
  const auto ctx = assemble_context(toy_hits(), kb, "query.wav", 2);
  ASSERT_EQ(ctx.demonstrations.size(), 2u);
  EXPECT_EQ(ctx.demonstrations[0].source_entry_id, 1u);
  EXPECT_EQ(ctx.demonstrations[1].source_entry_id, 3u);
  EXPECT_NEAR(ctx.demonstrations[1].s_fused, 0.8, 1e-6);
  EXPECT_EQ(render_context_json(ctx),
            R"({"demonstrations":[{"audio_ref":"clip-1","caption":"dog barking"},)"
            R"({"audio_ref":"clip-3","caption":"dog barking in the rain"}],)"
            R"("query_audio_ref":"query.wav"})");
}

TEST(ContextTest, DescendingPolicyKeepsRankOrder) {
  const auto kb = toy_kb();
  const auto ctx =
      assemble_context(toy_hits(), kb, "q", 3, OrderPolicy::kDescendingSimilarity);
  ASSERT_EQ(ctx.demonstrations.size(), 3u);
  EXPECT_EQ(ctx.demonstrations[0].source_entry_id, 3u);
  EXPECT_EQ(ctx.demonstrations[2].source_entry_id, 2u);
}

TEST(ContextTest, EdgeCases) {
  const auto kb = toy_kb();
  const auto empty = assemble_context({}, kb, "q", 5);
  EXPECT_TRUE(empty.demonstrations.empty());
  EXPECT_EQ(render_context_json(empty), R"({"demonstrations":[],"query_audio_ref":"q"})");
  EXPECT_TRUE(assemble_context(toy_hits(), kb, "q", 0).demonstrations.empty());

  auto dup = toy_hits();
  dup.push_back(dup.front());
  EXPECT_EQ(assemble_context(dup, kb, "q", 10).demonstrations.size(), 3u);

  std::vector<ScoredHit> ghost{{42, 0.0, std::nullopt, 0.9}};
  EXPECT_EQ(code_of([&] { assemble_context(ghost, kb, "q", 1); }), ErrorCode::kUnknownEntryId);
}

TEST(ContextTest, RenderingEscapesAndIsStable) {
  std::vector<PairEntry> entries(1);
  entries[0].id = 5;
  entries[0].audio = Embedding{1.0f, 0.0f};
  entries[0].text = Embedding{1.0f, 0.0f};
  entries[0].caption = "a \"quoted\"\nline \xc3\xa9";
  entries[0].audio_uri = "s3://b/k.wav";
  const KnowledgeBase kb("esc", 2, 2, std::move(entries));
  const std::vector<ScoredHit> hits{{5, 1.0, 1.0, 1.0}};
  const auto ctx = assemble_context(hits, kb, "q\\1", 1);
  const auto rendered = render_context_json(ctx);
  EXPECT_EQ(rendered, render_context_json(assemble_context(hits, kb, "q\\1", 1)));
  const auto doc = nlohmann::json::parse(rendered);
  EXPECT_EQ(doc["demonstrations"][0]["caption"], "a \"quoted\"\nline \xc3\xa9");
  EXPECT_EQ(doc["query_audio_ref"], "q\\1");
}

TEST(CurriculumTest, PhasesAndDrawnShotCounts) {
  const auto kb = testing::random_kb(300, 6, 6, 50);
  const auto trainset = kb.subset({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16}, "t");
  const auto indexes = IndexSet::flat(kb);
  const auto cur = build_curriculum(trainset, kb, indexes, Strategy::pair_to_pair(), kTrainMaxShots, 9);
  ASSERT_EQ(cur.phase1.samples.size(), trainset.size());
  ASSERT_EQ(cur.phase2.samples.size(), trainset.size());
  std::map<std::size_t, int> histogram;
  for (std::size_t i = 0; i < trainset.size(); ++i) {
    const auto& p1 = cur.phase1.samples[i];
    const auto& p2 = cur.phase2.samples[i];
    EXPECT_EQ(p1.k, 0u);
    EXPECT_TRUE(p1.demonstration_ids.empty());
    EXPECT_EQ(p2.query_id, trainset.at(i).id);
    EXPECT_GE(p2.k, 1u);
    EXPECT_LE(p2.k, kTrainMaxShots);
    EXPECT_EQ(p2.demonstration_ids.size(), p2.k);
    for (EntryId id : p2.demonstration_ids) EXPECT_NE(id, p2.query_id);
    ++histogram[p2.k];
  }
  EXPECT_GT(histogram.size(), 1u);

  const auto again = build_curriculum(trainset, kb, indexes, Strategy::pair_to_pair(), kTrainMaxShots, 9);
  EXPECT_EQ(cur.phase2.to_jsonl(), again.phase2.to_jsonl());

  std::istringstream lines(cur.phase2.to_jsonl());
  std::string line;
  std::getline(lines, line);
  const auto first = nlohmann::json::parse(line);
  EXPECT_EQ(first["phase"], 2);
  EXPECT_EQ(first["query_id"], 1);
  EXPECT_EQ(nlohmann::json::parse(cur.phase1.to_jsonl().substr(0, cur.phase1.to_jsonl().find('\n')))["k"], 0);

  EXPECT_EQ(code_of([&] {
              build_curriculum(trainset, kb, indexes, Strategy::pair_to_pair(), 0, 1);
            }),
            ErrorCode::kInvalidK);
}

}  // namespace
}  // namespace pairkb
