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

#include "pairkb/eval.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "pairkb/fixture.h"
#include "test_support.h"

namespace pairkb {
namespace {

using testing::code_of;

std::vector<EvalQuery> toy_queries() {
  EvalQuery q;
  q.id = 100;
  q.query.audio = Embedding{1.0f, 0.0f};
  q.query.text = Embedding{0.0f, 1.0f};
  q.reference_text = Embedding{0.0f, 1.0f};
  return {q};
}

TEST(RecallTest, Example) {
  const Rankings rankings{{1, {1, 3, 2}}, {2, {1, 3, 2}}};
  GroundTruth truth;
  truth.relevant = {{1, {1}}, {2, {2}}};
  EXPECT_DOUBLE_EQ(recall_at_k(rankings, truth, 1), 0.5);
  EXPECT_DOUBLE_EQ(recall_at_k(rankings, truth, 2), 0.5);
  EXPECT_DOUBLE_EQ(recall_at_k(rankings, truth, 3), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k(rankings, truth, 50), 1.0);
}

TEST(RecallTest, TypedErrors) {
  const Rankings rankings{{1, {1}}};
  GroundTruth truth;
  truth.relevant = {{1, {1}}, {2, {2}}};
  EXPECT_EQ(code_of([&] { recall_at_k(rankings, truth, 0); }), ErrorCode::kInvalidK);
  EXPECT_EQ(code_of([&] { recall_at_k(rankings, truth, 1); }), ErrorCode::kMissingRanking);
  EXPECT_EQ(code_of([&] { recall_at_k(rankings, GroundTruth{}, 1); }), ErrorCode::kInvalidArgument);

  const auto kb = toy_kb();
  EXPECT_NO_THROW(GroundTruth::self_pairs({1, 2, 3}).validate(kb));
  EXPECT_EQ(code_of([&] { GroundTruth::self_pairs({1, 7}).validate(kb); }),
            ErrorCode::kUnknownEntryId);
}

TEST(RecallPropertyTest, BoundedAndMonotoneInK) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    Rankings rankings;
    GroundTruth truth;
    const int queries = 1 + static_cast<int>(rng() % 20);
    for (int q = 0; q < queries; ++q) {
      auto& ranked = rankings[q];
      const int len = static_cast<int>(rng() % 15);
      for (int i = 0; i < len; ++i) ranked.push_back(rng() % 30);
      auto& rel = truth.relevant[q];
      for (int i = 0; i < 1 + static_cast<int>(rng() % 3); ++i) rel.insert(rng() % 30);
    }
    double previous = 0.0;
    for (std::size_t k = 1; k <= 16; ++k) {
      const double r = recall_at_k(rankings, truth, k);
      EXPECT_GE(r, previous);
      EXPECT_GE(r, 0.0);
      EXPECT_LE(r, 1.0);
      previous = r;
    }
  }
}

TEST(AccuracyTest, ExampleAndKeyMismatch) {
  EXPECT_DOUBLE_EQ(zero_shot_accuracy({{1, 5}, {2, 6}, {3, 7}, {4, 0}}, {{1, 5}, {2, 6}, {3, 8}, {4, 0}}),
                   0.75);
  EXPECT_EQ(code_of([] { zero_shot_accuracy({{1, 5}}, {{2, 5}}); }), ErrorCode::kKeyMismatch);
  EXPECT_EQ(code_of([] { zero_shot_accuracy({{1, 5}}, {{1, 5}, {2, 5}}); }),
            ErrorCode::kKeyMismatch);
}

TEST(MetricTest, NamesRoundTrip) {
  for (auto m : {Metric::kRecallAtK, Metric::kAccuracy, Metric::kMeanAudioSim, Metric::kMeanTextSim}) {
    EXPECT_EQ(parse_metric(metric_name(m)), m);
  }
  EXPECT_FALSE(parse_metric("precision").has_value());
}

TEST(SimilarityStatsTest, ToyExamples) {
  const auto kb = toy_kb();
  const auto indexes = IndexSet::flat(kb);
  const auto audio = similarity_stats(toy_queries(), kb, indexes, Strategy::audio_to_audio(), 2);
  EXPECT_NEAR(audio.mean_audio_sim, 0.9, 1e-6);
  EXPECT_NEAR(audio.std_audio_sim, 0.1, 1e-6);
  EXPECT_EQ(audio.n, 2u);
  EXPECT_EQ(audio.strategy, "audio_to_audio");

  const auto text = similarity_stats(toy_queries(), kb, indexes, Strategy::pair_to_pair(0.0), 1);
  EXPECT_NEAR(text.mean_text_sim, 1.0, 1e-6);
  EXPECT_NEAR(text.mean_audio_sim, 0.0, 1e-6);
}

TEST(SimilarityStatsTest, TypedErrors) {
  const auto kb = toy_kb();
  const auto indexes = IndexSet::flat(kb);
  EXPECT_EQ(code_of([&] { similarity_stats({}, kb, indexes, Strategy::audio_to_audio(), 1); }),
            ErrorCode::kEmptyRetrieval);
  auto queries = toy_queries();
  queries[0].reference_text.reset();
  queries[0].query.text.reset();
  EXPECT_EQ(code_of([&] { similarity_stats(queries, kb, indexes, Strategy::audio_to_audio(), 1); }),
            ErrorCode::kMissingTextQuery);
  const KnowledgeBase empty("e", 2, 2, {});
  EXPECT_EQ(code_of([&] {
              similarity_stats(toy_queries(), empty, IndexSet{}, Strategy::audio_to_audio(), 1);
            }),
            ErrorCode::kEmptyRetrieval);
}

// Independent pooled mean over oracle rankings.
TEST(SimilarityStatsTest, MatchesOraclePooledMeans) {
  const auto kb = generate_corpus({400, 8, 8, 3, 0.7, 1, "c"});
  const auto qkb = generate_queries(kb, {30, 0.4, 5});
  const auto queries = queries_from_kb(qkb);
  const double w = 0.3;
  EvalOptions options;
  options.exclude_self = false;
  const auto stats =
      similarity_stats(queries, kb, IndexSet::flat(kb), Strategy::pair_to_pair(w), 5, options);
  double sa = 0.0, st = 0.0;
  std::size_t n = 0;
  for (const auto& q : qkb.entries()) {
    for (const auto& h : testing::oracle_fused_rank(kb, q.audio.values(), q.text.values(), w, 5)) {
      sa += testing::oracle_dot(q.audio.values(), kb.entry(h.id).audio.values());
      st += testing::oracle_dot(q.text.values(), kb.entry(h.id).text.values());
      ++n;
    }
  }
  EXPECT_EQ(stats.n, n);
  EXPECT_NEAR(stats.mean_audio_sim, sa / n, 1e-9);
  EXPECT_NEAR(stats.mean_text_sim, st / n, 1e-9);
  EXPECT_EQ(stats.per_query_audio.size(), queries.size());
}

TEST(SweepTest, WeightSweepTopOneFollowsWeight) {
  const auto kb = toy_kb();
  SweepSpec spec;
  spec.metrics = {Metric::kMeanAudioSim, Metric::kMeanTextSim};
  spec.seed = 7;
  const auto result = weight_sweep(toy_queries(), kb, IndexSet::flat(kb), {0.0, 0.5, 1.0}, 1, spec);
  ASSERT_EQ(result.points.size(), 3u);
  std::vector<EntryId> top1;
  for (const auto& p : result.points) top1.push_back(p.rankings.at(100).front());
  EXPECT_EQ(top1, (std::vector<EntryId>{2, 3, 1}));

  const auto csv = result.to_csv();
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "axis_value,metric_name,metric_value,strategy,kb,k,W,seed");
  std::getline(lines, line);
  EXPECT_EQ(line, "0,mean_audio_sim,0,pair_to_pair,toy,1,0,7");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 5);

  const auto doc = nlohmann::json::parse(result.to_json());
  EXPECT_EQ(doc["axis"], "W");
  EXPECT_EQ(doc["points"][1]["top1"]["100"], 3);
}

TEST(SweepTest, TypedErrors) {
  const auto kb = toy_kb();
  const auto idx = IndexSet::flat(kb);
  SweepSpec spec;
  spec.metrics = {Metric::kMeanAudioSim};
  EXPECT_EQ(code_of([&] { weight_sweep(toy_queries(), kb, idx, {0.5, 0.2}, 1, spec); }),
            ErrorCode::kUnsortedAxis);
  EXPECT_EQ(code_of([&] { weight_sweep(toy_queries(), kb, idx, {0.5, 0.5}, 1, spec); }),
            ErrorCode::kUnsortedAxis);
  EXPECT_EQ(code_of([&] { weight_sweep(toy_queries(), kb, idx, {0.5, 1.5}, 1, spec); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { weight_sweep(toy_queries(), kb, idx, {0.5}, 0, spec); }),
            ErrorCode::kInvalidK);
  EXPECT_EQ(code_of([&] {
              weight_sweep(toy_queries(), kb, idx, {0.5}, 1, spec, StrategyTag::kAudioToAudio);
            }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] {
              topk_sweep(toy_queries(), kb, idx, {3, 2}, Strategy::audio_to_audio(), spec);
            }),
            ErrorCode::kUnsortedAxis);
  EXPECT_EQ(code_of([&] {
              topk_sweep(toy_queries(), kb, idx, {0, 2}, Strategy::audio_to_audio(), spec);
            }),
            ErrorCode::kInvalidK);
  SweepSpec needs_truth;
  needs_truth.metrics = {Metric::kRecallAtK};
  EXPECT_EQ(code_of([&] { weight_sweep(toy_queries(), kb, idx, {0.5}, 1, needs_truth); }),
            ErrorCode::kInvalidArgument);
}

TEST(SweepPropertyTest, RecallGrowsWithDepth) {
  const auto kb = generate_corpus({500, 8, 8, 11, 0.6, 1, "c"});
  const auto qkb = generate_queries(kb, {50, 0.8, 12});
  const auto queries = queries_from_kb(qkb);
  std::vector<EntryId> ids;
  for (const auto& e : qkb.entries()) ids.push_back(e.id);
  const auto truth = GroundTruth::self_pairs(ids);
  SweepSpec spec;
  spec.metrics = {Metric::kRecallAtK};
  spec.truth = &truth;
  spec.options.exclude_self = false;
  const auto result = topk_sweep(queries, kb, IndexSet::flat(kb), {1, 2, 5, 10, 50},
                                 Strategy::pair_to_pair(0.5), spec);
  double previous = 0.0;
  for (const auto& p : result.points) {
    EXPECT_GE(p.metrics[0].second, previous);
    previous = p.metrics[0].second;
  }
  EXPECT_GT(previous, 0.0);
  const auto doc = nlohmann::json::parse(result.to_json());
  EXPECT_EQ(doc["axis"], "top_k");
  EXPECT_EQ(doc["W"], 0.5);
}

}  // namespace
}  // namespace pairkb
