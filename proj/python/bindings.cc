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

// Python bindings: knowledge bases, retrieval, refinement, fusion and
// evaluation. Embeddings cross the boundary as lists of floats.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pairkb/context.h"
#include "pairkb/eval.h"
#include "pairkb/fixture.h"
#include "pairkb/fusion.h"
#include "pairkb/index.h"
#include "pairkb/refine.h"
#include "pairkb/retrieval.h"
#include "pairkb/store.h"

namespace py = pybind11;
using namespace pairkb;

namespace {

StrategyTag strategy_tag(const std::string& name) {
  const auto tag = parse_strategy(name);
  if (!tag) fail(ErrorCode::kInvalidArgument, "unknown strategy \"" + name + "\"");
  return *tag;
}

RetrievalQuery make_query(const std::vector<float>& audio,
                          const std::optional<std::vector<float>>& text) {
  RetrievalQuery q;
  q.audio = l2_normalize(Embedding(audio));
  if (text) q.text = l2_normalize(Embedding(*text));
  return q;
}

std::vector<float> to_list(const Embedding& v) { return {v.values().begin(), v.values().end()}; }

py::dict hit_dict(const ScoredHit& h) {
  py::dict d;
  d["id"] = h.entry_id;
  d["s_audio"] = h.s_audio;
  d["s_text"] = h.s_text ? py::cast(*h.s_text) : py::none();
  d["s_fused"] = h.s_fused;
  return d;
}

py::list hit_list(const std::vector<ScoredHit>& hits) {
  py::list out;
  for (const auto& h : hits) out.append(hit_dict(h));
  return out;
}

std::vector<PairEntry> entries_from(const py::list& items) {
  std::vector<PairEntry> out;
  for (const auto& item : items) {
    const auto d = item.cast<py::dict>();
    PairEntry e;
    e.id = d["id"].cast<EntryId>();
    e.audio = Embedding(d["audio"].cast<std::vector<float>>());
    e.text = Embedding(d["text"].cast<std::vector<float>>());
    e.caption = d["caption"].cast<std::string>();
    if (d.contains("audio_uri")) e.audio_uri = d["audio_uri"].cast<std::string>();
    if (d.contains("source")) e.source = d["source"].cast<std::string>();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_pairkb, m) {
  m.doc() = "Audio-text pair knowledge bases: retrieval, refinement and evaluation";

  static py::exception<Error> error_type(m, "PairKBError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error_type;
      py::object instance = exc(e.what());
      instance.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error_type.ptr(), instance.ptr());
    }
  });

  py::class_<PairEntry>(m, "PairEntry")
      .def_readonly("id", &PairEntry::id)
      .def_property_readonly("audio", [](const PairEntry& e) { return to_list(e.audio); })
      .def_property_readonly("text", [](const PairEntry& e) { return to_list(e.text); })
      .def_readonly("caption", &PairEntry::caption)
      .def_readonly("audio_uri", &PairEntry::audio_uri)
      .def_readonly("source", &PairEntry::source);

  py::class_<KnowledgeBase, std::shared_ptr<KnowledgeBase>>(m, "KnowledgeBase")
      .def(py::init([](const std::string& name, std::size_t audio_dim, std::size_t text_dim,
                       const py::list& entries) {
             return std::make_shared<KnowledgeBase>(name, audio_dim, text_dim,
                                                    entries_from(entries));
           }),
           py::arg("name"), py::arg("audio_dim"), py::arg("text_dim"), py::arg("entries"),
           "entries: list of dicts with id, audio, text, caption[, audio_uri, source]")
      .def_property_readonly("name", &KnowledgeBase::name)
      .def_property_readonly("audio_dim",
                             [](const KnowledgeBase& kb) { return kb.schema().audio_dim; })
      .def_property_readonly("text_dim", [](const KnowledgeBase& kb) { return kb.schema().text_dim; })
      .def("__len__", &KnowledgeBase::size)
      .def("__contains__", &KnowledgeBase::contains)
      .def("entry", &KnowledgeBase::entry, py::return_value_policy::copy)
      .def("ids", [](const KnowledgeBase& kb) {
        std::vector<EntryId> ids;
        for (const auto& e : kb.entries()) ids.push_back(e.id);
        return ids;
      });

  m.def("toy_kb", [] { return std::make_shared<KnowledgeBase>(toy_kb()); });
  m.def(
      "generate_corpus",
      [](std::size_t n, std::size_t audio_dim, std::size_t text_dim, std::uint64_t seed,
         double correlation) {
        CorpusParams p;
        p.n = n;
        p.audio_dim = audio_dim;
        p.text_dim = text_dim;
        p.seed = seed;
        p.correlation = correlation;
        return std::make_shared<KnowledgeBase>(generate_corpus(p));
      },
      py::arg("n"), py::arg("audio_dim") = 16, py::arg("text_dim") = 16, py::arg("seed") = 42,
      py::arg("correlation") = 0.5);
  m.def(
      "generate_queries",
      [](const KnowledgeBase& kb, std::size_t count, double noise, std::uint64_t seed) {
        return std::make_shared<KnowledgeBase>(generate_queries(kb, {count, noise, seed}));
      },
      py::arg("kb"), py::arg("count"), py::arg("noise") = 0.5, py::arg("seed") = 7);

  m.def("load_store", [](const std::filesystem::path& p) {
    return std::make_shared<KnowledgeBase>(load_embedding_store(p));
  });
  m.def("save_store", &save_embedding_store, py::arg("kb"), py::arg("path"));

  m.def(
      "retrieve",
      [](const KnowledgeBase& kb, const std::string& strategy, const std::vector<float>& audio,
         std::optional<std::vector<float>> text, std::size_t k, double w,
         std::vector<EntryId> exclude) {
        const auto s = Strategy::make(strategy_tag(strategy), w);
        const IdSet ex(exclude.begin(), exclude.end());
        return hit_list(retrieve_exhaustive(kb, s, make_query(audio, text), k, &ex));
      },
      py::arg("kb"), py::arg("strategy"), py::arg("audio"), py::arg("text") = py::none(),
      py::arg("k") = 5, py::arg("W") = kDefaultWeight,
      py::arg("exclude") = std::vector<EntryId>{});

  m.def(
      "refine",
      [](const KnowledgeBase& kb, const KnowledgeBase& trainset, std::size_t k,
         std::optional<bool> exclude_self) {
        auto result = refine_kb(kb, trainset, k, exclude_self);
        return py::make_tuple(std::make_shared<KnowledgeBase>(std::move(result.refined)),
                              result.report.to_json());
      },
      py::arg("kb"), py::arg("trainset"), py::arg("k"), py::arg("exclude_self") = py::none(),
      "Returns (refined KB, report JSON string).");

  m.def(
      "search_index",
      [](const KnowledgeBase& kb, const std::string& field, const std::vector<float>& query,
         std::size_t k, std::optional<std::size_t> n_clusters, std::size_t n_probe) {
        const auto f = parse_field(field);
        if (!f) fail(ErrorCode::kInvalidArgument, "unknown field \"" + field + "\"");
        const auto index = n_clusters ? build_clustered(kb, *f, {*n_clusters, n_probe, 42, 25})
                                      : build_flat(kb, *f);
        std::vector<std::pair<EntryId, double>> out;
        for (const auto& h : search_topk(index, Embedding(query), k).hits) {
          out.emplace_back(h.id, h.score);
        }
        return out;
      },
      py::arg("kb"), py::arg("field"), py::arg("query"), py::arg("k"),
      py::arg("n_clusters") = py::none(), py::arg("n_probe") = 4);

  m.def(
      "zero_shot_classify",
      [](const std::vector<float>& audio, const std::vector<float>& gen_text,
         const std::vector<std::pair<EntryId, std::vector<float>>>& classes) {
        FusionQuery q{l2_normalize(Embedding(audio)), Embedding(gen_text)};
        if (q.gen_text.norm() > 0.0) q.gen_text = l2_normalize(q.gen_text);
        std::vector<CandidateText> candidates;
        for (const auto& [id, emb] : classes) {
          candidates.push_back(make_candidate(id, "class " + std::to_string(id), Embedding(emb)));
        }
        return zero_shot_classify(q, candidates);
      },
      py::arg("audio"), py::arg("gen_text"), py::arg("classes"));

  m.def(
      "recall_at_k",
      [](const Rankings& rankings, const std::map<EntryId, std::set<EntryId>>& truth,
         std::size_t k) { return recall_at_k(rankings, GroundTruth{truth}, k); },
      py::arg("rankings"), py::arg("truth"), py::arg("k"));
  m.def("zero_shot_accuracy", &zero_shot_accuracy, py::arg("predictions"), py::arg("truth"));

  m.def(
      "weight_sweep",
      [](const KnowledgeBase& kb, const KnowledgeBase& queries, const std::vector<double>& weights,
         std::size_t k, bool exclude_self) {
        const auto qs = queries_from_kb(queries);
        std::vector<EntryId> ids;
        for (const auto& q : qs) ids.push_back(q.id);
        const auto truth = GroundTruth::self_pairs(ids);
        SweepSpec spec{{Metric::kRecallAtK}, &truth, 0, {}};
        spec.options.exclude_self = exclude_self;
        return weight_sweep(qs, kb, IndexSet::flat(kb), weights, k, spec).to_csv();
      },
      py::arg("kb"), py::arg("queries"), py::arg("weights"), py::arg("k") = 1,
      py::arg("exclude_self") = false, "Self-pair recall@k per W, as CSV.");

  m.def(
      "interleaved_context",
      [](const KnowledgeBase& kb, const std::vector<float>& audio,
         std::optional<std::vector<float>> text, const std::string& query_audio_ref,
         std::size_t k, double w) {
        const auto hits = retrieve_exhaustive(kb, Strategy::pair_to_pair(w),
                                              make_query(audio, text), k, nullptr);
        return render_context_json(assemble_context(hits, kb, query_audio_ref, k));
      },
      py::arg("kb"), py::arg("audio"), py::arg("text"), py::arg("query_audio_ref"),
      py::arg("k") = 5, py::arg("W") = kDefaultWeight);
}
