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

#include "pairkb/fixture.h"

#include <array>
#include <cmath>
#include <numeric>
#include <random>

namespace pairkb {

KnowledgeBase toy_kb() {
  std::vector<PairEntry> entries = {
      {1, Embedding{1.0f, 0.0f}, Embedding{1.0f, 0.0f}, "dog barking", "clip-1", "toy"},
      {2, Embedding{0.0f, 1.0f}, Embedding{0.0f, 1.0f}, "rain falling", "clip-2", "toy"},
      {3, Embedding{0.8f, 0.6f}, Embedding{0.6f, 0.8f}, "dog barking in the rain", "clip-3",
       "toy"},
  };
  return KnowledgeBase("toy", 2, 2, std::move(entries));
}

namespace {

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  return v;
}

std::vector<double> unit(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (auto& x : v) x /= n;
  return v;
}

std::vector<float> to_float(const std::vector<double>& v) {
  return {v.begin(), v.end()};
}

constexpr std::array<const char*, 8> kSubjects = {"a dog", "rain", "a crowd", "an engine",
                                                  "birds", "a train", "wind", "a woman"};
constexpr std::array<const char*, 8> kActions = {"barks", "falls", "cheers", "idles",
                                                 "chirp", "passes by", "blows", "speaks"};
constexpr std::array<const char*, 6> kSettings = {"in the distance", "nearby", "outdoors",
                                                  "over a radio", "in a hall", "at night"};

}  // namespace

std::vector<Embedding> random_unit_vectors(std::size_t count, std::size_t dim,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Embedding> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(to_float(unit(gaussian(rng, dim))));
  return out;
}

KnowledgeBase generate_corpus(const CorpusParams& p) {
  if (p.n == 0 || p.audio_dim == 0 || p.text_dim == 0) {
    fail(ErrorCode::kInvalidArgument, "corpus size and dims must be positive");
  }
  if (!(p.correlation >= 0.0 && p.correlation <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "correlation must be in [0, 1]");
  }
  std::mt19937_64 rng(p.seed);
  std::vector<PairEntry> entries;
  entries.reserve(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    // Rounded to float first so that correlation 1 reproduces the audio
    // vector bit for bit.
    const auto audio_f = to_float(unit(gaussian(rng, p.audio_dim)));
    const auto noise = unit(gaussian(rng, p.text_dim));
    std::vector<double> text(p.text_dim);
    for (std::size_t d = 0; d < p.text_dim; ++d) {
      text[d] = p.correlation * static_cast<double>(audio_f[d % p.audio_dim]) +
                (1.0 - p.correlation) * noise[d];
    }
    std::uniform_int_distribution<std::size_t> pick_s(0, kSubjects.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_a(0, kActions.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_w(0, kSettings.size() - 1);
    std::string caption = std::string(kSubjects[pick_s(rng)]) + " " + kActions[pick_a(rng)] +
                          " " + kSettings[pick_w(rng)];

    const EntryId id = p.first_id + i;
    entries.push_back({id, Embedding(audio_f), Embedding(to_float(text)), std::move(caption),
                       "synthetic://clip-" + std::to_string(id), p.name});
  }
  return KnowledgeBase(p.name, p.audio_dim, p.text_dim, std::move(entries));
}

KnowledgeBase generate_queries(const KnowledgeBase& kb, const QueryParams& p) {
  if (p.count == 0 || p.count > kb.size()) {
    fail(ErrorCode::kInvalidArgument, "query count must be in [1, KB size]");
  }
  if (!(p.noise >= 0.0) || !std::isfinite(p.noise)) {
    fail(ErrorCode::kInvalidArgument, "noise must be a finite non-negative number");
  }
  std::mt19937_64 rng(p.seed);
  std::vector<std::size_t> order(kb.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < p.count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }

  auto perturb = [&](const Embedding& v) {
    auto g = unit(gaussian(rng, v.dim()));
    std::vector<float> out(v.dim());
    for (std::size_t d = 0; d < v.dim(); ++d) {
      out[d] = static_cast<float>(static_cast<double>(v[d]) + p.noise * g[d]);
    }
    return Embedding(std::move(out));
  };

  std::vector<PairEntry> queries;
  queries.reserve(p.count);
  for (std::size_t i = 0; i < p.count; ++i) {
    const auto& src = kb.at(order[i]);
    PairEntry q;
    q.id = src.id;
    q.audio = perturb(src.audio);
    q.text = perturb(src.text);
    q.caption = src.caption;
    q.audio_uri = "query://clip-" + std::to_string(src.id);
    q.source = "query";
    queries.push_back(std::move(q));
  }
  return KnowledgeBase(kb.name() + "-queries", kb.schema().audio_dim, kb.schema().text_dim,
                       std::move(queries));
}

}  // namespace pairkb
