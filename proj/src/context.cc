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

#include <algorithm>
#include <random>

#include "json.hpp"
#include "pairkb/parallel.h"

namespace pairkb {

using ordered_json = nlohmann::ordered_json;

InterleavedContext assemble_context(const std::vector<ScoredHit>& hits, const KnowledgeBase& kb,
                                    std::string query_audio_ref, std::size_t k,
                                    OrderPolicy policy) {
  InterleavedContext ctx;
  ctx.query_audio_ref = std::move(query_audio_ref);
  ctx.order_policy = policy;
  IdSet used;
  for (const auto& hit : hits) {
    if (ctx.demonstrations.size() == k) break;
    if (!used.insert(hit.entry_id).second) continue;
    const auto& e = kb.entry(hit.entry_id);
    ctx.demonstrations.push_back({e.audio_uri, e.caption, e.id, hit.s_fused});
  }
  if (policy == OrderPolicy::kAscendingSimilarity) {
    std::reverse(ctx.demonstrations.begin(), ctx.demonstrations.end());
  }
  return ctx;
}

std::string render_context_json(const InterleavedContext& ctx) {
  ordered_json doc;
  auto& demos = doc["demonstrations"] = ordered_json::array();
  for (const auto& d : ctx.demonstrations) {
    demos.push_back({{"audio_ref", d.audio_ref}, {"caption", d.caption}});
  }
  doc["query_audio_ref"] = ctx.query_audio_ref;
  return doc.dump();
}

std::string CurriculumManifest::to_jsonl() const {
  std::string out;
  for (const auto& s : samples) {
    ordered_json line;
    line["phase"] = phase;
    line["query_id"] = s.query_id;
    line["k"] = s.k;
    line["demonstration_ids"] = s.demonstration_ids;
    out += line.dump();
    out += '\n';
  }
  return out;
}

Curriculum build_curriculum(const KnowledgeBase& trainset, const KnowledgeBase& kb,
                            const IndexSet& indexes, const Strategy& strategy, std::size_t max_k,
                            std::uint64_t seed) {
  if (max_k == 0) fail(ErrorCode::kInvalidK, "K must be >= 1");
  Curriculum out;
  out.phase1.phase = 1;
  out.phase2.phase = 2;
  out.phase1.samples.resize(trainset.size());
  out.phase2.samples.resize(trainset.size());

  parallel_for(trainset.size(), [&](std::size_t i) {
    const auto& q = trainset.at(i);
    out.phase1.samples[i] = {q.id, 0, {}};

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(q.id), static_cast<std::uint32_t>(q.id >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> draw(1, max_k);
    const std::size_t k = draw(rng);

    RetrievalQuery query{q.audio, q.text, q.caption, q.audio_uri};
    const IdSet self{q.id};
    const auto hits = retrieve(kb, indexes, strategy, query, k, &self);
    auto& sample = out.phase2.samples[i];
    sample.query_id = q.id;
    sample.k = k;
    for (const auto& h : hits) sample.demonstration_ids.push_back(h.entry_id);
  });
  return out;
}

}  // namespace pairkb
