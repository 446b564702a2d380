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

#include "pairkb/service.h"

#include <charconv>

#include "httplib.h"
#include "json_io.h"
#include "pairkb/fusion.h"
#include "pairkb/store.h"

namespace pairkb {

using json_io::json;
using json_io::ordered_json;

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSharedSpaceRequired:
    case ErrorCode::kMissingTextQuery:
    case ErrorCode::kMissingIndex:
    case ErrorCode::kCaptionFailed:
    case ErrorCode::kEncodeFailed:
    case ErrorCode::kSchemaMismatch:
    case ErrorCode::kEmptyKB:
    case ErrorCode::kEmptyTrainset:
    case ErrorCode::kEmptyCandidates:
      return 422;
    case ErrorCode::kUnknownEntryId:
      return 404;
    default:
      return 400;
  }
}

namespace {

HttpReply error_reply(int status, std::string_view code, const std::string& message) {
  ordered_json body;
  body["error"] = std::string(code);
  body["message"] = message;
  return {status, body.dump()};
}

HttpReply error_reply(const Error& e) {
  return error_reply(http_status_for(e.code()), error_code_name(e.code()), e.what());
}

HttpReply no_snapshot() {
  return error_reply(503, "NoSnapshot", "no knowledge base loaded");
}

json parse_body(std::string_view body) {
  json doc = json::parse(body.begin(), body.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    fail(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  }
  return doc;
}

std::size_t positive_k(const json& doc) {
  if (!doc.contains("k") || !doc["k"].is_number_unsigned() || doc["k"].get<std::uint64_t>() == 0) {
    fail(ErrorCode::kInvalidArgument, "\"k\" must be a positive integer");
  }
  return doc["k"].get<std::size_t>();
}

}  // namespace

Service::Service(EngineConfig config, ServiceProviders providers)
    : config_(std::move(config)), providers_(std::move(providers)) {
  if (!providers_.captioner && !config_.captioner_url.empty()) {
    providers_.captioner = std::make_shared<RemoteCaptioner>(
        config_.captioner_url, std::chrono::milliseconds(config_.timeout_ms));
  }
}

Service::~Service() { stop(); }

KbBundle Service::bundle(KnowledgeBase kb) const {
  KbBundle b;
  auto shared = std::make_shared<const KnowledgeBase>(std::move(kb));
  if (!shared->empty()) {
    if (config_.index_kind == IndexKind::kClustered && shared->size() >= config_.n_clusters) {
      b.indexes = IndexSet::clustered(*shared, config_.cluster_params());
    } else {
      b.indexes = IndexSet::flat(*shared);
    }
  }
  b.text_encoder = providers_.text_encoder;
  if (!b.text_encoder && !config_.encoder_url.empty()) {
    // The remote encoder's output dim is only known once a KB is loaded.
    RemoteConfig rc{config_.encoder_url, shared->schema().text_dim,
                    std::chrono::milliseconds(config_.timeout_ms),
                    static_cast<std::ptrdiff_t>(config_.max_in_flight)};
    b.text_encoder = std::make_shared<RemoteEncoder>(std::move(rc), Modality::kText);
  }
  b.kb = std::move(shared);
  return b;
}

std::shared_ptr<const Snapshot> Service::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return snapshot_;
}

void Service::install(KnowledgeBase kb, std::filesystem::path source) {
  auto next = std::make_shared<Snapshot>();
  next->primary = bundle(std::move(kb));
  next->source = std::move(source);
  std::lock_guard lock(snapshot_mu_);
  next->id = next_snapshot_id_++;
  snapshot_ = std::move(next);
}

void Service::load(const std::filesystem::path& kb_path) {
  const auto path = config_.resolve(kb_path);
  install(load_embedding_store(path), path);
}

void Service::register_named(const std::string& name, KnowledgeBase kb) {
  auto b = bundle(std::move(kb));
  std::lock_guard lock(snapshot_mu_);
  auto next = snapshot_ ? std::make_shared<Snapshot>(*snapshot_) : std::make_shared<Snapshot>();
  next->named[name] = std::move(b);
  next->id = next_snapshot_id_++;
  snapshot_ = std::move(next);
}

// --- handlers ---------------------------------------------------------------

HttpReply Service::search(std::string_view body) const {
  const auto snap = snapshot();
  if (!snap) return no_snapshot();
  try {
    const auto doc = parse_body(body);

    const KbBundle* target = &snap->primary;
    if (doc.contains("kb")) {
      if (!doc["kb"].is_string()) fail(ErrorCode::kInvalidArgument, "\"kb\" must be a string");
      auto it = snap->named.find(doc["kb"].get<std::string>());
      if (it == snap->named.end()) {
        return error_reply(404, "UnknownKB", "no knowledge base named " + doc["kb"].dump());
      }
      target = &it->second;
    }
    const auto& kb = *target->kb;

    if (!doc.contains("strategy") || !doc["strategy"].is_string()) {
      fail(ErrorCode::kInvalidArgument, "\"strategy\" must be a string");
    }
    const auto tag = parse_strategy(doc["strategy"].get<std::string>());
    if (!tag) fail(ErrorCode::kInvalidArgument, "unknown strategy " + doc["strategy"].dump());
    double w = config_.default_w;
    if (doc.contains("W")) {
      if (!doc["W"].is_number()) fail(ErrorCode::kInvalidArgument, "\"W\" must be a number");
      w = doc["W"].get<double>();
    }
    const auto strategy = Strategy::make(*tag, w);
    const auto k = positive_k(doc);

    if (!doc.contains("query") || !doc["query"].is_object()) {
      fail(ErrorCode::kInvalidArgument, "\"query\" must be an object");
    }
    const auto& query = doc["query"];
    RetrievalQuery q;
    if (query.contains("audio_ref")) {
      if (!query["audio_ref"].is_string()) {
        fail(ErrorCode::kInvalidArgument, "\"audio_ref\" must be a string");
      }
      q.audio_ref = query["audio_ref"].get<std::string>();
    }
    if (query.contains("audio")) {
      q.audio = json_io::embedding_from(query["audio"], "query.audio");
    } else if (q.audio_ref) {
      if (const auto* e = kb.find_by_audio_uri(*q.audio_ref)) {
        q.audio = e->audio;
      } else if (providers_.audio_encoder) {
        q.audio = providers_.audio_encoder->encode(*q.audio_ref);
      } else {
        fail(ErrorCode::kUnknownAudioRef, "cannot resolve audio_ref \"" + *q.audio_ref + "\"");
      }
    } else {
      fail(ErrorCode::kInvalidArgument, "query needs \"audio\" or \"audio_ref\"");
    }
    if (q.audio.dim() != kb.schema().audio_dim) {
      fail(ErrorCode::kDimMismatch, "query audio dim " + std::to_string(q.audio.dim()) +
                                        ", KB audio dim " + std::to_string(kb.schema().audio_dim));
    }
    q.audio = l2_normalize(q.audio);

    if (doc.contains("text")) {
      const auto& text = doc["text"];
      if (text.is_string()) {
        if (!target->text_encoder) {
          fail(ErrorCode::kMissingTextQuery, "no text encoder configured for string text queries");
        }
        q.text_query = text.get<std::string>();
        q.text = target->text_encoder->encode(*q.text_query);
      } else {
        q.text = l2_normalize(json_io::embedding_from(text, "text"));
      }
    }

    IdSet exclude;
    if (doc.contains("exclude_ids")) {
      for (auto id : json_io::ids_from(doc["exclude_ids"], "exclude_ids")) exclude.insert(id);
    }

    ordered_json out;
    if (*tag == StrategyTag::kGenerativePairToPair && !q.text) {
      if (!providers_.captioner || !target->text_encoder) {
        fail(ErrorCode::kCaptionFailed, "generative retrieval needs a captioner and a text encoder");
      }
      const auto result = generative_retrieve(kb, target->indexes, q, *providers_.captioner,
                                              *target->text_encoder, w, k, &exclude,
                                              config_.retrieve_options());
      out["hits"] = json_io::hits_json(result.hits, kb);
      out["text_query"] = result.text_query;
    } else {
      const auto hits =
          retrieve(kb, target->indexes, strategy, q, k, &exclude, config_.retrieve_options());
      out["hits"] = json_io::hits_json(hits, kb);
      if (q.text_query) out["text_query"] = *q.text_query;
    }
    out["snapshot_id"] = snap->id;
    return {200, out.dump()};
  } catch (const Error& e) {
    return error_reply(e);
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, "InvalidArgument", e.what());
  }
}

HttpReply Service::refine(std::string_view body) {
  const auto snap = snapshot();
  if (!snap) return no_snapshot();

  std::size_t k = 0;
  std::optional<bool> exclude_self;
  std::string name = "refined";
  bool wait = false;
  std::optional<KnowledgeBase> trainset;
  try {
    const auto doc = parse_body(body);
    k = positive_k(doc);
    if (doc.contains("exclude_self")) {
      if (!doc["exclude_self"].is_boolean()) {
        fail(ErrorCode::kInvalidArgument, "\"exclude_self\" must be a boolean");
      }
      exclude_self = doc["exclude_self"].get<bool>();
    }
    if (doc.contains("name")) {
      if (!doc["name"].is_string() || doc["name"].get<std::string>().empty()) {
        fail(ErrorCode::kInvalidArgument, "\"name\" must be a non-empty string");
      }
      name = doc["name"].get<std::string>();
    }
    if (doc.contains("wait")) wait = doc["wait"].is_boolean() && doc["wait"].get<bool>();

    const auto& kb = *snap->primary.kb;
    if (doc.contains("trainset_path")) {
      if (!doc["trainset_path"].is_string()) {
        fail(ErrorCode::kInvalidArgument, "\"trainset_path\" must be a string");
      }
      trainset = load_embedding_store(config_.resolve(doc["trainset_path"].get<std::string>()));
    } else if (doc.contains("trainset_ids")) {
      IdSet ids;
      for (auto id : json_io::ids_from(doc["trainset_ids"], "trainset_ids")) {
        kb.entry(id);
        ids.insert(id);
      }
      trainset = kb.subset(ids, "trainset");
    } else if (doc.contains("trainset") && doc["trainset"].is_array()) {
      std::vector<PairEntry> entries;
      for (const auto& item : doc["trainset"]) {
        if (!item.is_object() || !item.contains("id") || !item["id"].is_number_unsigned()) {
          fail(ErrorCode::kInvalidArgument, "trainset items need an unsigned \"id\"");
        }
        PairEntry e;
        e.id = item["id"].get<EntryId>();
        e.audio = json_io::embedding_from(item.value("audio", json()), "trainset audio");
        e.text = json_io::embedding_from(item.value("text", json()), "trainset text");
        e.caption = item.value("caption", std::string("trainset item"));
        entries.push_back(std::move(e));
      }
      const auto& s = kb.schema();
      trainset = KnowledgeBase("trainset", s.audio_dim, s.text_dim, std::move(entries));
    } else {
      fail(ErrorCode::kInvalidArgument,
           "refine needs \"trainset_path\", \"trainset_ids\" or an inline \"trainset\"");
    }
  } catch (const Error& e) {
    return error_reply(e);
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, "InvalidArgument", e.what());
  }

  bool expected = false;
  if (!refine_running_.compare_exchange_strong(expected, true)) {
    return error_reply(409, "RefineRunning", "a refine job is already running");
  }
  {
    std::lock_guard lock(refine_mu_);
    refine_state_ = "running";
    refine_report_.reset();
    refine_error_.clear();
    refine_error_code_.reset();
  }

  struct Outcome {
    std::optional<RefineReport> report;
    std::string error;
    std::optional<ErrorCode> code;
  };
  auto job = [this, snap, trainset = std::move(*trainset), k, exclude_self, name]() {
    Outcome o;
    try {
      auto result = refine_kb(*snap->primary.kb, trainset, k, exclude_self, name);
      register_named(name, std::move(result.refined));
      o.report = std::move(result.report);
    } catch (const Error& e) {
      o.error = e.what();
      o.code = e.code();
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    // Publishing and releasing the job slot happen together, so a client
    // that sees "done" can start the next job straight away.
    std::lock_guard lock(refine_mu_);
    refine_state_ = o.report ? "done" : "failed";
    refine_report_ = o.report;
    refine_error_ = o.error;
    refine_error_code_ = o.code;
    refine_running_ = false;
    return o;
  };

  if (wait) {
    const auto o = job();
    if (o.report) return {200, o.report->to_json()};
    if (o.code) return error_reply(http_status_for(*o.code), error_code_name(*o.code), o.error);
    return error_reply(500, "Internal", o.error);
  }
  {
    std::lock_guard lock(worker_mu_);
    if (refine_worker_.joinable()) refine_worker_.join();
    refine_worker_ = std::jthread(std::move(job));
  }
  ordered_json out;
  out["status"] = "accepted";
  out["name"] = name;
  return {202, out.dump()};
}

HttpReply Service::refine_status() const {
  std::lock_guard lock(refine_mu_);
  ordered_json out;
  out["status"] = refine_state_;
  if (refine_report_) out["report"] = ordered_json::parse(refine_report_->to_json());
  if (!refine_error_.empty()) out["error"] = refine_error_;
  return {200, out.dump()};
}

HttpReply Service::classify(std::string_view body) const {
  const auto snap = snapshot();
  auto encoder = providers_.text_encoder;
  if (!encoder && snap) encoder = snap->primary.text_encoder;
  try {
    const auto doc = parse_body(body);
    if (!doc.contains("audio")) fail(ErrorCode::kInvalidArgument, "\"audio\" is required");
    FusionQuery q;
    q.audio = l2_normalize(json_io::embedding_from(doc["audio"], "audio"));
    if (doc.contains("gen_text")) {
      q.gen_text = json_io::embedding_from(doc["gen_text"], "gen_text");
      if (q.gen_text.norm() > 0.0) q.gen_text = l2_normalize(q.gen_text);
    } else if (doc.contains("text") && doc["text"].is_string()) {
      if (!encoder) {
        fail(ErrorCode::kMissingTextQuery, "no text encoder configured for string text");
      }
      q.gen_text = encoder->encode(doc["text"].get<std::string>());
    } else {
      q.gen_text = Embedding(std::vector<float>(q.audio.dim(), 0.0f));
    }
    if (!doc.contains("classes") || !doc["classes"].is_array()) {
      fail(ErrorCode::kInvalidArgument, "\"classes\" must be an array");
    }
    std::vector<CandidateText> classes;
    for (const auto& c : doc["classes"]) {
      if (!c.is_object() || !c.contains("id") || !c["id"].is_number_unsigned()) {
        fail(ErrorCode::kInvalidArgument, "each class needs an unsigned \"id\"");
      }
      const auto text = c.contains("text") && c["text"].is_string() ? c["text"].get<std::string>()
                                                                    : std::string();
      const auto emb = json_io::embedding_from(c.value("embedding", json()), "class embedding");
      if (emb.dim() != q.audio.dim() || q.gen_text.dim() != q.audio.dim()) {
        fail(ErrorCode::kDimMismatch, "audio, gen_text and class embeddings must share a dim");
      }
      classes.push_back(make_candidate(c["id"].get<EntryId>(), text, emb));
    }
    const auto [id, score] = zero_shot_classify(q, classes);
    ordered_json out;
    out["class_id"] = id;
    out["score"] = score;
    return {200, out.dump()};
  } catch (const Error& e) {
    return error_reply(e);
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, "InvalidArgument", e.what());
  }
}

HttpReply Service::entry(std::string_view id_text) const {
  const auto snap = snapshot();
  if (!snap) return no_snapshot();
  EntryId id = 0;
  const auto* end = id_text.data() + id_text.size();
  auto [ptr, ec] = std::from_chars(id_text.data(), end, id);
  if (ec != std::errc() || ptr != end) {
    return error_reply(400, "InvalidArgument", "entry id must be an unsigned integer");
  }
  const auto pos = snap->primary.kb->position_of(id);
  if (!pos) return error_reply(404, "UnknownEntryId", "no entry with id " + std::string(id_text));
  return {200, json_io::entry_json(snap->primary.kb->at(*pos)).dump()};
}

HttpReply Service::healthz() const {
  const auto snap = snapshot();
  ordered_json out;
  if (!snap) {
    out["status"] = "no_snapshot";
    out["snapshot_id"] = nullptr;
    out["kb_size"] = 0;
    return {503, out.dump()};
  }
  out["status"] = "ok";
  out["snapshot_id"] = snap->id;
  out["kb_size"] = snap->primary.kb->size();
  return {200, out.dump()};
}

HttpReply Service::reload(std::string_view body) {
  try {
    std::filesystem::path path;
    if (!body.empty()) {
      const auto doc = parse_body(body);
      if (doc.contains("kb_path")) {
        if (!doc["kb_path"].is_string()) {
          fail(ErrorCode::kInvalidArgument, "\"kb_path\" must be a string");
        }
        path = doc["kb_path"].get<std::string>();
      }
    }
    if (path.empty()) {
      const auto snap = snapshot();
      if (!snap || snap->source.empty()) {
        fail(ErrorCode::kInvalidArgument, "no kb_path given and no previous source to reload");
      }
      path = snap->source;
    }
    load(path);
    return healthz();
  } catch (const Error& e) {
    return error_reply(e);
  }
}

// --- HTTP glue ----------------------------------------------------------------

void Service::route() {
  server_ = std::make_unique<httplib::Server>();
  server_->new_task_queue = [] { return new httplib::ThreadPool(256); };
  server_->set_tcp_nodelay(true);
  server_->set_keep_alive_max_count(1000);
  auto reply = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server_->Post("/search", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, search(req.body));
  });
  server_->Post("/refine", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, refine(req.body));
  });
  server_->Get("/refine", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, refine_status());
  });
  server_->Post("/classify", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, classify(req.body));
  });
  server_->Get(R"(/entries/([^/]+))",
               [this, reply](const httplib::Request& req, httplib::Response& res) {
                 reply(res, entry(req.matches[1].str()));
               });
  server_->Get("/healthz", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, healthz());
  });
  server_->Post("/reload", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, reload(req.body));
  });
  server_->set_exception_handler(
      [reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        reply(res, error_reply(500, "Internal", what));
      });
}

int Service::start(const std::string& host, int port) {
  route();
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) fail(ErrorCode::kIoError, "cannot bind " + host + ":" + std::to_string(port));
  server_thread_ = std::jthread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void Service::listen(const std::string& host, int port) {
  route();
  if (!server_->listen(host, port)) {
    fail(ErrorCode::kIoError, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void Service::stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
  std::lock_guard lock(worker_mu_);
  if (refine_worker_.joinable()) refine_worker_.join();
}

}  // namespace pairkb
