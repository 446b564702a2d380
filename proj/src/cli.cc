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

#include "pairkb/cli.h"

#include <charconv>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "json_io.h"
#include "pairkb/config.h"
#include "pairkb/context.h"
#include "pairkb/eval.h"
#include "pairkb/fixture.h"
#include "pairkb/index.h"
#include "pairkb/refine.h"
#include "pairkb/retrieval.h"
#include "pairkb/service.h"
#include "pairkb/store.h"

namespace pairkb {
namespace {

namespace fs = std::filesystem;
using json_io::json;
using json_io::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void usage(const std::string& msg) { throw UsageError(msg); }

constexpr std::size_t kMaxCount = std::numeric_limits<std::uint32_t>::max();

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::kInvalidArgument, path.string() + " is not valid JSON");
  return doc;
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::kIoError, "short write to " + path.string());
}

EntryId parse_id_key(const std::string& key, const fs::path& source) {
  EntryId id = 0;
  const auto* end = key.data() + key.size();
  auto [ptr, ec] = std::from_chars(key.data(), end, id);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::kInvalidArgument, source.string() + ": key \"" + key + "\" is not an id");
  }
  return id;
}

// {"<query id>": [candidate ids...]}
std::map<EntryId, std::vector<EntryId>> read_id_lists(const fs::path& path) {
  const auto doc = read_json_file(path);
  if (!doc.is_object()) fail(ErrorCode::kInvalidArgument, path.string() + " must be an object");
  std::map<EntryId, std::vector<EntryId>> out;
  for (const auto& [key, value] : doc.items()) {
    out[parse_id_key(key, path)] = json_io::ids_from(value, path.string());
  }
  return out;
}

// {"<query id>": class id}
std::map<EntryId, EntryId> read_id_map(const fs::path& path) {
  const auto doc = read_json_file(path);
  if (!doc.is_object()) fail(ErrorCode::kInvalidArgument, path.string() + " must be an object");
  std::map<EntryId, EntryId> out;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_number_unsigned()) {
      fail(ErrorCode::kInvalidArgument, path.string() + ": values must be unsigned ids");
    }
    out[parse_id_key(key, path)] = value.get<EntryId>();
  }
  return out;
}

GroundTruth read_truth(const fs::path& path) {
  GroundTruth truth;
  for (auto& [q, ids] : read_id_lists(path)) truth.relevant[q] = {ids.begin(), ids.end()};
  return truth;
}

Embedding inline_vector(const std::string& text, std::string_view what) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) usage(std::string(what) + " must be a JSON array of numbers");
  return json_io::embedding_from(doc, what);
}

std::string ordered_dump(const ordered_json& doc) { return doc.dump(2) + "\n"; }

// Shared state for every subcommand.
struct Globals {
  std::string config_path;
  EngineConfig config;

  void finalize() {
    if (!config_path.empty()) config = load_config(config_path);
    apply_env_overrides(config);
  }
  KnowledgeBase load_kb(const std::string& path) const {
    return load_embedding_store(config.resolve(path));
  }
  fs::path resolve(const std::string& path) const { return config.resolve(path); }
};

// "auto" | "true" | "false"
std::optional<bool> tri_state(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  return std::nullopt;
}

IndexSet indexes_for(const KnowledgeBase& kb, const EngineConfig& cfg) {
  if (cfg.index_kind == IndexKind::kClustered && kb.size() >= cfg.n_clusters) {
    return IndexSet::clustered(kb, cfg.cluster_params());
  }
  return IndexSet::flat(kb);
}

// --- build-index --------------------------------------------------------------

struct BuildIndexArgs {
  std::string kb;
  std::string field = "audio";
  std::string kind = "flat";
  std::optional<std::size_t> clusters;
  std::optional<std::size_t> probe;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_build_index(const Globals& g, const BuildIndexArgs& a, std::ostream& out) {
  const auto field = *parse_field(a.field);
  const auto kb = g.load_kb(a.kb);
  auto params = g.config.cluster_params();
  if (a.clusters) params.n_clusters = *a.clusters;
  if (a.probe) params.n_probe = *a.probe;
  if (a.seed) params.seed = *a.seed;
  if (a.clusters && !a.probe) params.n_probe = std::min(params.n_probe, params.n_clusters);

  const auto index = a.kind == "clustered" ? build_clustered(kb, field, params) : build_flat(kb, field);
  fs::path dest = a.out.empty() ? g.resolve(a.kb) : g.resolve(a.out);
  if (a.out.empty()) dest.replace_extension("." + std::string(field_name(field)) + ".pkix");
  save_index(index, dest);

  out << "N=" << index.size() << " dim=" << index.dim() << " field=" << field_name(field)
      << " kind=" << index_kind_name(index.kind());
  if (index.kind() == IndexKind::kClustered) {
    std::size_t smallest = std::numeric_limits<std::size_t>::max();
    std::size_t largest = 0;
    for (const auto& list : index.posting_lists()) {
      smallest = std::min(smallest, list.size());
      largest = std::max(largest, list.size());
    }
    out << " clusters=" << index.n_clusters() << " probe=" << index.n_probe()
        << " list_min=" << smallest << " list_max=" << largest;
  }
  out << " out=" << dest.string() << "\n";
  return 0;
}

// --- retrieve -----------------------------------------------------------------

struct RetrieveArgs {
  std::string kb;
  std::string strategy = "pair_to_pair";
  std::optional<double> w;
  std::size_t k = 5;
  std::string query;
  std::string query_audio;
  std::string query_text;
  std::string text;
  std::string audio_ref;
  std::string captioner;
  std::string text_encoder;
  std::vector<EntryId> exclude;
  std::string audio_index;
  std::string text_index;
  bool force_overfetch = false;
  std::string context_out;
  std::string out;
};

int cmd_retrieve(const Globals& g, const RetrieveArgs& a, std::ostream& out) {
  const auto tag = *parse_strategy(a.strategy);
  const double w = a.w.value_or(g.config.default_w);
  const auto strategy = Strategy::make(tag, w);
  const auto kb = std::make_shared<const KnowledgeBase>(g.load_kb(a.kb));

  if (!a.query.empty() && !a.query_audio.empty()) {
    usage("--query and --query-audio are mutually exclusive");
  }
  if (a.query.empty() && a.query_audio.empty() && a.audio_ref.empty()) {
    usage("give --query <file>, --query-audio <json> or --audio-ref <ref>");
  }

  RetrievalQuery q;
  if (!a.query.empty()) {
    const auto qs = load_embedding_store(g.resolve(a.query));
    if (qs.size() != 1) {
      fail(ErrorCode::kInvalidArgument, "query file must hold exactly one record, found " +
                                            std::to_string(qs.size()));
    }
    const auto& e = qs.entries().front();
    q.audio = e.audio;
    q.text = e.text;
    if (!e.audio_uri.empty()) q.audio_ref = e.audio_uri;
  } else if (!a.query_audio.empty()) {
    q.audio = l2_normalize(inline_vector(a.query_audio, "--query-audio"));
  } else {
    const auto* e = kb->find_by_audio_uri(a.audio_ref);
    if (e == nullptr) fail(ErrorCode::kUnknownAudioRef, "no KB entry has audio_uri " + a.audio_ref);
    q.audio = e->audio;
  }
  if (!a.audio_ref.empty()) q.audio_ref = a.audio_ref;

  std::unique_ptr<EncoderProvider> encoder;
  if (!a.text_encoder.empty()) {
    encoder = make_text_encoder(a.text_encoder, kb->schema().text_dim);
  } else if (!g.config.encoder_url.empty() && tag == StrategyTag::kGenerativePairToPair) {
    encoder = make_text_encoder("remote:" + g.config.encoder_url, kb->schema().text_dim);
  } else {
    encoder = std::make_unique<StoreEncoder>(kb, Modality::kText);
  }
  if (!a.query_text.empty()) q.text = l2_normalize(inline_vector(a.query_text, "--query-text"));
  if (!a.text.empty()) {
    q.text_query = a.text;
    q.text = encoder->encode(a.text);
  }

  IndexSet indexes;
  if (!a.audio_index.empty() || !a.text_index.empty()) {
    if (!a.audio_index.empty()) {
      indexes.audio = std::make_shared<const VectorIndex>(load_index(g.resolve(a.audio_index)));
    }
    if (!a.text_index.empty()) {
      indexes.text = std::make_shared<const VectorIndex>(load_index(g.resolve(a.text_index)));
    }
  } else {
    indexes = indexes_for(*kb, g.config);
  }
  auto options = g.config.retrieve_options();
  options.force_overfetch = a.force_overfetch;
  const IdSet exclude(a.exclude.begin(), a.exclude.end());

  ordered_json doc;
  doc["strategy"] = strategy_name(tag);
  if (strategy.weight()) doc["W"] = *strategy.weight();
  doc["k"] = a.k;
  std::vector<ScoredHit> hits;
  if (tag == StrategyTag::kGenerativePairToPair) {
    if (a.captioner.empty() && g.config.captioner_url.empty()) {
      usage("generative_pair_to_pair needs --captioner");
    }
    const auto captioner = make_captioner(a.captioner.empty() ? "remote:" + g.config.captioner_url
                                                              : a.captioner);
    q.text.reset();
    auto result = generative_retrieve(*kb, indexes, q, *captioner, *encoder, w, a.k, &exclude,
                                      options);
    doc["text_query"] = result.text_query;
    hits = std::move(result.hits);
  } else {
    hits = retrieve(*kb, indexes, strategy, q, a.k, &exclude, options);
    if (q.text_query) doc["text_query"] = *q.text_query;
  }
  doc["hits"] = json_io::hits_json(hits, *kb);

  if (!a.context_out.empty()) {
    const auto ctx = assemble_context(hits, *kb, q.audio_ref.value_or(""), a.k);
    write_text(g.resolve(a.context_out), render_context_json(ctx) + "\n");
  }
  if (a.out.empty()) {
    out << ordered_dump(doc);
  } else {
    write_text(g.resolve(a.out), ordered_dump(doc));
  }
  return 0;
}

// --- refine -------------------------------------------------------------------

struct RefineArgs {
  std::string kb;
  std::string trainset;
  std::size_t k = 10;
  std::string out;
  std::string report;
  std::string exclude_self = "auto";
  std::string name = "refined";
};

int cmd_refine(const Globals& g, const RefineArgs& a, std::ostream& out) {
  const auto kb = g.load_kb(a.kb);
  const auto trainset = g.load_kb(a.trainset);
  const auto result = refine_kb(kb, trainset, a.k, tri_state(a.exclude_self), a.name);
  save_embedding_store(result.refined, g.resolve(a.out));
  const auto report = result.report.to_json();
  if (a.report.empty()) {
    out << report << "\n";
  } else {
    write_text(g.resolve(a.report), report + "\n");
    out << "input=" << result.report.input_kb_size << " trainset=" << result.report.trainset_size
        << " k=" << result.report.k << " output=" << result.report.output_size
        << " compression_ratio=" << result.report.compression_ratio() << "\n";
  }
  return 0;
}

// --- eval / sweep -------------------------------------------------------------

std::vector<Metric> parse_metrics(const std::vector<std::string>& names) {
  std::vector<Metric> out;
  for (const auto& n : names) {
    const auto m = parse_metric(n);
    if (!m) usage("unknown metric \"" + n + "\"");
    out.push_back(*m);
  }
  return out;
}

bool ids_overlap(const std::vector<EvalQuery>& queries, const KnowledgeBase& kb) {
  for (const auto& q : queries) {
    if (kb.contains(q.id)) return true;
  }
  return false;
}

struct EvalArgs {
  std::string rankings;
  std::string truth;
  std::vector<std::size_t> ks{1};
  std::string predictions;
  std::string labels;
  std::string kb;
  std::string queries;
  std::string strategy = "pair_to_pair";
  std::optional<double> w;
  std::vector<std::string> metrics{"recall@k"};
  std::string exclude_self = "auto";
};

int cmd_eval(const Globals& g, const EvalArgs& a, std::ostream& out) {
  ordered_json doc;
  if (!a.rankings.empty()) {
    if (a.truth.empty()) usage("--rankings needs --truth");
    const auto rankings = read_id_lists(g.resolve(a.rankings));
    const auto truth = read_truth(g.resolve(a.truth));
    for (auto k : a.ks) doc["recall@" + std::to_string(k)] = recall_at_k(rankings, truth, k);
  } else if (!a.predictions.empty()) {
    if (a.labels.empty()) usage("--predictions needs --labels");
    doc["accuracy"] =
        zero_shot_accuracy(read_id_map(g.resolve(a.predictions)), read_id_map(g.resolve(a.labels)));
  } else if (!a.kb.empty()) {
    const auto kb = g.load_kb(a.kb);
    const auto query_kb = a.queries.empty() ? kb : g.load_kb(a.queries);
    const auto queries = queries_from_kb(query_kb);
    const auto tag = *parse_strategy(a.strategy);
    const auto strategy = Strategy::make(tag, a.w.value_or(g.config.default_w));
    const auto indexes = indexes_for(kb, g.config);
    const bool self_truth = a.truth.empty() || a.truth == "self";

    GroundTruth truth;
    if (self_truth) {
      std::vector<EntryId> ids;
      for (const auto& q : queries) ids.push_back(q.id);
      truth = GroundTruth::self_pairs(ids);
    } else {
      truth = read_truth(g.resolve(a.truth));
    }
    EvalOptions options;
    options.retrieve = g.config.retrieve_options();
    options.exclude_self = tri_state(a.exclude_self).value_or(!self_truth && ids_overlap(queries, kb));

    SweepSpec spec{parse_metrics(a.metrics), &truth, g.config.seed, options};
    std::vector<std::size_t> ks = a.ks;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    const auto sweep = topk_sweep(queries, kb, indexes, ks, strategy, spec);
    doc["strategy"] = strategy_name(tag);
    if (strategy.weight()) doc["W"] = *strategy.weight();
    doc["kb"] = kb.name();
    doc["exclude_self"] = options.exclude_self;
    ordered_json points = ordered_json::array();
    for (const auto& p : sweep.points) {
      ordered_json point;
      point["k"] = static_cast<std::size_t>(p.value);
      for (const auto& [m, v] : p.metrics) point[std::string(metric_name(m))] = v;
      points.push_back(std::move(point));
    }
    doc["points"] = std::move(points);
    const std::size_t max_k = ks.back();
    const auto stats = similarity_stats(queries, kb, indexes, strategy, max_k, options);
    doc["similarity"] = {{"k", max_k},
                         {"mean_audio_sim", stats.mean_audio_sim},
                         {"std_audio_sim", stats.std_audio_sim},
                         {"mean_text_sim", stats.mean_text_sim},
                         {"std_text_sim", stats.std_text_sim},
                         {"n", stats.n}};
  } else {
    usage("eval needs --rankings/--truth, --predictions/--labels or --kb");
  }
  out << ordered_dump(doc);
  return 0;
}

struct SweepArgs {
  std::string kb;
  std::string queries;
  std::string axis = "W";
  std::vector<double> values;
  std::string strategy = "pair_to_pair";
  std::size_t k = 1;
  std::optional<double> w;
  std::vector<std::string> metrics{"recall@k"};
  std::string truth = "self";
  std::string exclude_self = "auto";
  std::optional<std::uint64_t> seed;
  std::string csv;
  std::string json_out;
};

int cmd_sweep(const Globals& g, const SweepArgs& a, std::ostream& out) {
  const auto kb = g.load_kb(a.kb);
  const auto query_kb = a.queries.empty() ? kb : g.load_kb(a.queries);
  const auto queries = queries_from_kb(query_kb);
  const auto indexes = indexes_for(kb, g.config);
  const bool self_truth = a.truth == "self";

  GroundTruth truth;
  if (self_truth) {
    std::vector<EntryId> ids;
    for (const auto& q : queries) ids.push_back(q.id);
    truth = GroundTruth::self_pairs(ids);
  } else {
    truth = read_truth(g.resolve(a.truth));
  }
  EvalOptions options;
  options.retrieve = g.config.retrieve_options();
  options.exclude_self = tri_state(a.exclude_self).value_or(!self_truth && ids_overlap(queries, kb));
  const SweepSpec spec{parse_metrics(a.metrics), &truth, a.seed.value_or(g.config.seed), options};
  const auto tag = *parse_strategy(a.strategy);

  SweepResult result;
  if (a.axis == "W") {
    if (tag != StrategyTag::kPairToPair && tag != StrategyTag::kGenerativePairToPair) {
      usage("a W sweep needs a pair strategy");
    }
    result = weight_sweep(queries, kb, indexes, a.values, a.k, spec, tag);
  } else {
    std::vector<std::size_t> ks;
    for (double v : a.values) {
      if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
        usage("top_k values must be positive integers");
      }
      ks.push_back(static_cast<std::size_t>(v));
    }
    result = topk_sweep(queries, kb, indexes, ks,
                        Strategy::make(tag, a.w.value_or(g.config.default_w)), spec);
  }

  const auto csv = result.to_csv();
  if (!a.json_out.empty()) write_text(g.resolve(a.json_out), result.to_json() + "\n");
  if (!a.csv.empty()) {
    write_text(g.resolve(a.csv), csv);
  } else {
    out << csv;
  }
  return 0;
}

// --- gen-fixture --------------------------------------------------------------

struct GenFixtureArgs {
  std::string preset = "synthetic";
  std::size_t n = 1000;
  std::size_t d_audio = 16;
  std::size_t d_text = 16;
  std::uint64_t seed = 42;
  double correlation = 0.5;
  std::string out;
  std::string queries_out;
  std::size_t query_count = 100;
  double query_noise = 0.5;
  std::uint64_t query_seed = 7;
};

fs::path sibling(const fs::path& kb_path, const std::string& suffix) {
  auto p = kb_path;
  p.replace_filename(kb_path.stem().string() + suffix);
  return p;
}

int write_toy(const fs::path& dest, std::ostream& out) {
  const auto kb = toy_kb();
  save_embedding_store(kb, dest);

  // Multimodal query a=(1,0), t=(0,1); its audio_uri is captioned "dog barking".
  std::vector<PairEntry> query;
  query.push_back({100, Embedding({1.0f, 0.0f}), Embedding({0.0f, 1.0f}), "query", "clip-1", "toy"});
  save_embedding_store(KnowledgeBase("query", 2, 2, std::move(query)), sibling(dest, "_query.pkb"));

  std::vector<PairEntry> train;
  train.push_back(
      {10, Embedding({1.0f, 0.0f}), Embedding({1.0f, 0.0f}), "trusted dog", "train-1", "toy"});
  save_embedding_store(KnowledgeBase("trainset", 2, 2, std::move(train)),
                       sibling(dest, "_trainset.pkb"));

  write_text(sibling(dest, "_captions.json"), "{\"clip-1\": \"dog barking\"}\n");
  write_text(sibling(dest, "_texts.json"), "{\"dog barking\": [1.0, 0.0]}\n");
  // Query 1 is right at rank 1, query 2 only at rank 3.
  write_text(sibling(dest, "_rankings.json"), "{\"1\": [1, 3, 2], \"2\": [1, 3, 2]}\n");
  write_text(sibling(dest, "_truth.json"), "{\"1\": [1], \"2\": [2]}\n");
  out << "N=" << kb.size() << " preset=toy out=" << dest.string() << "\n";
  return 0;
}

int cmd_gen_fixture(const Globals& g, const GenFixtureArgs& a, std::ostream& out) {
  const auto dest = g.resolve(a.out);
  if (a.preset == "toy") return write_toy(dest, out);

  CorpusParams params;
  params.n = a.n;
  params.audio_dim = a.d_audio;
  params.text_dim = a.d_text;
  params.seed = a.seed;
  params.correlation = a.correlation;
  params.name = dest.stem().string();
  const auto kb = generate_corpus(params);
  save_embedding_store(kb, dest);
  out << "N=" << kb.size() << " d_A=" << a.d_audio << " d_T=" << a.d_text << " seed=" << a.seed
      << " correlation=" << a.correlation << " out=" << dest.string() << "\n";

  if (!a.queries_out.empty()) {
    const auto qdest = g.resolve(a.queries_out);
    const auto queries =
        generate_queries(kb, {std::min(a.query_count, kb.size()), a.query_noise, a.query_seed});
    save_embedding_store(queries, qdest);
    out << "queries=" << queries.size() << " noise=" << a.query_noise << " out=" << qdest.string()
        << "\n";
  }
  return 0;
}

// --- serve --------------------------------------------------------------------

struct ServeArgs {
  std::string kb;
  std::string listen = "127.0.0.1:8080";
  std::string captioner;
  std::string text_encoder;
};

int cmd_serve(const Globals& g, const ServeArgs& a, std::ostream& out) {
  const auto colon = a.listen.rfind(':');
  if (colon == std::string::npos) usage("--listen must be host:port");
  int port = 0;
  const auto port_text = a.listen.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    usage("--listen port must be 0..65535");
  }

  ServiceProviders providers;
  if (!a.captioner.empty()) providers.captioner = make_captioner(a.captioner);
  std::optional<KnowledgeBase> kb;
  if (!a.kb.empty()) kb = g.load_kb(a.kb);
  if (!a.text_encoder.empty()) {
    if (!kb) usage("--text-encoder needs --kb to fix the text dim");
    providers.text_encoder = make_text_encoder(a.text_encoder, kb->schema().text_dim);
  }
  Service service(g.config, std::move(providers));
  if (kb) service.install(std::move(*kb), g.resolve(a.kb));
  out << "listening on " << a.listen << "\n" << std::flush;
  service.listen(a.listen.substr(0, colon), port);
  return 0;
}

std::string joined(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pairkb: audio-text pair knowledge bases, retrieval and evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Engine config file (key = value)");

  const std::vector<std::string> strategies{"audio_to_audio", "audio_to_text", "audio_to_mixture",
                                            "pair_to_pair", "generative_pair_to_pair"};
  const auto strategy_check = CLI::IsMember(strategies);
  const auto tri = CLI::IsMember({"auto", "true", "false"});
  const auto positive = CLI::Range(std::size_t{1}, kMaxCount);
  const auto unit_interval = CLI::Range(0.0, 1.0);

  BuildIndexArgs bi;
  auto* build = app.add_subcommand("build-index", "Build a flat or clustered index over one field");
  build->add_option("--kb", bi.kb, "PKB1 store")->required();
  build->add_option("--field", bi.field, "audio | text | pair_concat")
      ->check(CLI::IsMember({"audio", "text", "pair_concat"}));
  build->add_option("--kind", bi.kind, "flat | clustered")->check(CLI::IsMember({"flat", "clustered"}));
  build->add_option("--clusters", bi.clusters, "Number of clusters")->check(positive);
  build->add_option("--probe", bi.probe, "Clusters probed per search")->check(positive);
  build->add_option("--seed", bi.seed, "k-means seed");
  build->add_option("--out", bi.out, "Index file (default <kb>.<field>.pkix)");

  RetrieveArgs ra;
  auto* retr = app.add_subcommand("retrieve", "Rank KB pairs against a query");
  retr->add_option("--kb", ra.kb, "PKB1 store")->required();
  retr->add_option("--strategy", ra.strategy, joined(strategies))->check(strategy_check);
  retr->add_option("--W", ra.w, "Audio weight in [0, 1] for pair strategies")->check(unit_interval);
  retr->add_option("--k", ra.k, "Number of hits")->check(positive);
  retr->add_option("--query", ra.query, "1-record PKB1 query file");
  retr->add_option("--query-audio", ra.query_audio, "Inline audio embedding, JSON array");
  retr->add_option("--query-text", ra.query_text, "Inline text embedding, JSON array");
  retr->add_option("--text", ra.text, "Text query, encoded with --text-encoder");
  retr->add_option("--audio-ref", ra.audio_ref, "Audio locator for the captioner");
  retr->add_option("--captioner", ra.captioner, "table:<json> | remote:<url>");
  retr->add_option("--text-encoder", ra.text_encoder,
                   "table:<json> | remote:<url> (default: KB caption lookup)");
  retr->add_option("--exclude", ra.exclude, "Entry ids to drop from the hits")->delimiter(',');
  retr->add_option("--audio-index", ra.audio_index, "Prebuilt audio index");
  retr->add_option("--text-index", ra.text_index, "Prebuilt text index");
  retr->add_flag("--force-overfetch", ra.force_overfetch, "Use the index path at any KB size");
  retr->add_option("--context", ra.context_out, "Also write the interleaved few-shot context");
  retr->add_option("--out", ra.out, "Write hits JSON here instead of stdout");

  RefineArgs fa;
  auto* ref = app.add_subcommand("refine", "Filter a KB down to the neighbours of a trainset");
  ref->add_option("--kb", fa.kb, "PKB1 store to filter")->required();
  ref->add_option("--trainset", fa.trainset, "PKB1 store of trusted pairs")->required();
  ref->add_option("--k", fa.k, "Neighbours kept per trainset pair")->check(positive);
  ref->add_option("--out", fa.out, "Refined PKB1 store")->required();
  ref->add_option("--report", fa.report, "Report JSON (default stdout)");
  ref->add_option("--exclude-self", fa.exclude_self, "auto | true | false")->check(tri);
  ref->add_option("--name", fa.name, "Name of the refined KB");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Recall@k, zero-shot accuracy and similarity statistics");
  ev->add_option("--rankings", ea.rankings, "JSON {query id: [ranked ids]}");
  ev->add_option("--truth", ea.truth, "JSON {query id: [relevant ids]} or \"self\"");
  ev->add_option("--k", ea.ks, "Cutoffs, comma separated")->delimiter(',')->check(positive);
  ev->add_option("--predictions", ea.predictions, "JSON {query id: class id}");
  ev->add_option("--labels", ea.labels, "JSON {query id: class id}");
  ev->add_option("--kb", ea.kb, "PKB1 store to retrieve from");
  ev->add_option("--queries", ea.queries, "PKB1 query store (default: the KB itself)");
  ev->add_option("--strategy", ea.strategy, joined(strategies))->check(strategy_check);
  ev->add_option("--W", ea.w, "Audio weight")->check(unit_interval);
  ev->add_option("--metrics", ea.metrics, "recall@k, accuracy, mean_audio_sim, mean_text_sim")
      ->delimiter(',');
  ev->add_option("--exclude-self", ea.exclude_self, "auto | true | false")->check(tri);

  SweepArgs sa;
  auto* sw = app.add_subcommand("sweep", "Weight or top-k sweep, CSV and JSON out");
  sw->add_option("--kb", sa.kb, "PKB1 store")->required();
  sw->add_option("--queries", sa.queries, "PKB1 query store (default: the KB itself)");
  sw->add_option("--axis", sa.axis, "W | top_k")->check(CLI::IsMember({"W", "top_k"}));
  sw->add_option("--values", sa.values, "Axis values, comma separated")->delimiter(',')->required();
  sw->add_option("--strategy", sa.strategy, joined(strategies))->check(strategy_check);
  sw->add_option("--k", sa.k, "Fixed k of a W sweep")->check(positive);
  sw->add_option("--W", sa.w, "Fixed W of a top_k sweep")->check(unit_interval);
  sw->add_option("--metrics", sa.metrics, "recall@k, accuracy, mean_audio_sim, mean_text_sim")
      ->delimiter(',');
  sw->add_option("--truth", sa.truth, "\"self\" or JSON {query id: [relevant ids]}");
  sw->add_option("--exclude-self", sa.exclude_self, "auto | true | false")->check(tri);
  sw->add_option("--seed", sa.seed, "Seed recorded in the outputs");
  sw->add_option("--csv", sa.csv, "CSV output (default stdout)");
  sw->add_option("--json", sa.json_out, "JSON output");

  GenFixtureArgs ga;
  auto* gen = app.add_subcommand("gen-fixture", "Write a seeded synthetic or toy KB");
  gen->add_option("--preset", ga.preset, "synthetic | toy")->check(CLI::IsMember({"synthetic", "toy"}));
  gen->add_option("--n", ga.n, "Number of pairs")->check(positive);
  gen->add_option("--d-audio", ga.d_audio, "Audio dim")->check(positive);
  gen->add_option("--d-text", ga.d_text, "Text dim")->check(positive);
  gen->add_option("--seed", ga.seed, "Corpus seed");
  gen->add_option("--correlation", ga.correlation, "Audio-text correlation in [0, 1]")
      ->check(unit_interval);
  gen->add_option("--out", ga.out, "PKB1 output path")->required();
  gen->add_option("--queries-out", ga.queries_out, "Also write noisy copies as a query store");
  gen->add_option("--query-count", ga.query_count, "Number of queries")->check(positive);
  gen->add_option("--query-noise", ga.query_noise, "Per-modality perturbation norm")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--query-seed", ga.query_seed, "Query seed");

  ServeArgs va;
  auto* srv = app.add_subcommand("serve", "Serve the HTTP API");
  srv->add_option("--kb", va.kb, "PKB1 store loaded at start");
  srv->add_option("--listen", va.listen, "host:port");
  srv->add_option("--captioner", va.captioner, "table:<json> | remote:<url>");
  srv->add_option("--text-encoder", va.text_encoder, "table:<json> | remote:<url>");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    g.finalize();
    if (*build) return cmd_build_index(g, bi, out);
    if (*retr) return cmd_retrieve(g, ra, out);
    if (*ref) return cmd_refine(g, fa, out);
    if (*ev) return cmd_eval(g, ea, out);
    if (*sw) return cmd_sweep(g, sa, out);
    if (*gen) return cmd_gen_fixture(g, ga, out);
    if (*srv) return cmd_serve(g, va, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace pairkb
