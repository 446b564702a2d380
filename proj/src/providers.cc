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

#include "pairkb/providers.h"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "httplib.h"
#include "json.hpp"

namespace pairkb {

using json = nlohmann::json;

std::string_view modality_name(Modality m) { return m == Modality::kAudio ? "audio" : "text"; }

Embedding stub_text_encode(std::string_view caption, const TextTable& table) {
  auto it = table.find(caption);
  if (it == table.end()) {
    fail(ErrorCode::kUnknownCaption, "no embedding for caption \"" + std::string(caption) + "\"");
  }
  return l2_normalize(it->second);
}

std::string stub_caption(std::string_view audio_ref, const CaptionTable& table) {
  auto it = table.find(audio_ref);
  if (it == table.end()) {
    fail(ErrorCode::kUnknownAudioRef, "no caption for audio ref \"" + std::string(audio_ref) + "\"");
  }
  return it->second;
}

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    fail(ErrorCode::kInvalidArgument, path.string() + " must hold a JSON object");
  }
  return doc;
}

std::vector<float> floats_from_json(const json& arr) {
  if (!arr.is_array()) fail(ErrorCode::kMalformedResponse, "expected an array of numbers");
  std::vector<float> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) fail(ErrorCode::kMalformedResponse, "expected an array of numbers");
    const double d = v.get<double>();
    if (!std::isfinite(d) || !std::isfinite(static_cast<float>(d))) {
      fail(ErrorCode::kNonFiniteResponse, "non-finite value in vector");
    }
    out.push_back(static_cast<float>(d));
  }
  return out;
}

}  // namespace

TextTable load_text_table(const std::filesystem::path& path) {
  TextTable table;
  const auto doc = read_json_file(path);
  for (const auto& [caption, values] : doc.items()) {
    try {
      table.emplace(caption, Embedding(floats_from_json(values)));
    } catch (const Error& e) {
      fail(ErrorCode::kInvalidArgument,
           "bad vector for \"" + caption + "\" in " + path.string() + ": " + e.what());
    }
  }
  return table;
}

CaptionTable load_caption_table(const std::filesystem::path& path) {
  CaptionTable table;
  const auto doc = read_json_file(path);
  for (const auto& [ref, caption] : doc.items()) {
    if (!caption.is_string()) {
      fail(ErrorCode::kInvalidArgument, "caption for \"" + ref + "\" must be a string");
    }
    table.emplace(ref, caption.get<std::string>());
  }
  return table;
}

TableTextEncoder::TableTextEncoder(TextTable table) : table_(std::move(table)) {
  if (table_.empty()) fail(ErrorCode::kInvalidArgument, "empty text table");
  dim_ = table_.begin()->second.dim();
  for (const auto& [caption, emb] : table_) {
    if (emb.dim() != dim_) fail(ErrorCode::kDimMismatch, "mixed dims in text table");
  }
}

Embedding TableTextEncoder::encode(std::string_view caption) const {
  return stub_text_encode(caption, table_);
}

std::string TableCaptioner::caption(std::string_view audio_ref) const {
  return stub_caption(audio_ref, table_);
}

StoreEncoder::StoreEncoder(std::shared_ptr<const KnowledgeBase> kb, Modality modality)
    : kb_(std::move(kb)), modality_(modality) {
  for (std::size_t i = 0; i < kb_->size(); ++i) {
    const auto& e = kb_->at(i);
    lookup_.emplace(modality_ == Modality::kAudio ? e.audio_uri : e.caption, i);
  }
}

std::size_t StoreEncoder::dim() const {
  return modality_ == Modality::kAudio ? kb_->schema().audio_dim : kb_->schema().text_dim;
}

Embedding StoreEncoder::encode(std::string_view payload) const {
  auto it = lookup_.find(payload);
  if (it == lookup_.end()) {
    fail(modality_ == Modality::kAudio ? ErrorCode::kUnknownAudioRef : ErrorCode::kUnknownCaption,
         "\"" + std::string(payload) + "\" not found in store " + kb_->name());
  }
  const auto& e = kb_->at(it->second);
  return modality_ == Modality::kAudio ? e.audio : e.text;
}

// --- remote ----------------------------------------------------------------

HttpEndpoint parse_endpoint(std::string_view url) {
  constexpr std::string_view kScheme = "http://";
  if (url.substr(0, kScheme.size()) != kScheme) {
    fail(ErrorCode::kInvalidArgument, "endpoint must start with http://: " + std::string(url));
  }
  const auto rest = url.substr(kScheme.size());
  const auto slash = rest.find('/');
  const auto authority = rest.substr(0, slash);
  if (authority.empty()) fail(ErrorCode::kInvalidArgument, "endpoint has no host");
  HttpEndpoint ep;
  ep.scheme_host_port = std::string(kScheme) + std::string(authority);
  ep.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  return ep;
}

std::string encode_request_body(const RemoteEncodeRequest& req) {
  json body = {{"modality", std::string(modality_name(req.modality))}};
  if (req.modality == Modality::kText) {
    body["text"] = req.payload;
  } else {
    body["audio_uri"] = req.payload;
  }
  return body.dump();
}

Embedding parse_encode_response(std::string_view body, std::size_t expected_dim) {
  json doc = json::parse(body.begin(), body.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("values")) {
    fail(ErrorCode::kMalformedResponse, "response is not {\"values\": [...], \"dim\": n}");
  }
  auto values = floats_from_json(doc["values"]);
  if (doc.contains("dim")) {
    const auto& d = doc["dim"];
    if (!d.is_number_integer() || d.get<std::int64_t>() < 0 ||
        static_cast<std::size_t>(d.get<std::int64_t>()) != values.size()) {
      fail(ErrorCode::kMalformedResponse, "\"dim\" disagrees with the values array");
    }
  }
  if (values.size() != expected_dim) {
    fail(ErrorCode::kDimMismatch, "remote returned dim " + std::to_string(values.size()) +
                                      ", expected " + std::to_string(expected_dim));
  }
  if (values.empty()) fail(ErrorCode::kMalformedResponse, "empty vector");
  return l2_normalize(Embedding(std::move(values)));
}

namespace {

std::string post_json(std::string_view url, const std::string& body,
                      std::chrono::milliseconds timeout) {
  const auto ep = parse_endpoint(url);
  httplib::Client client(ep.scheme_host_port);
  client.set_tcp_nodelay(true);
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout - sec);
  client.set_connection_timeout(sec.count(), usec.count());
  client.set_read_timeout(sec.count(), usec.count());
  client.set_write_timeout(sec.count(), usec.count());

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(ep.path, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const auto elapsed = std::chrono::steady_clock::now() - start;
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= timeout)) {
      fail(ErrorCode::kTimeout, "no response from " + std::string(url) + " within " +
                                    std::to_string(timeout.count()) + " ms");
    }
    fail(ErrorCode::kTransportError, std::string(url) + ": " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    fail(ErrorCode::kHttpStatus, std::string(url) + " returned HTTP " + std::to_string(res->status));
  }
  return res->body;
}

}  // namespace

Embedding remote_encode(const RemoteEncodeRequest& req, std::string_view endpoint,
                        std::chrono::milliseconds timeout, std::size_t expected_dim) {
  return parse_encode_response(post_json(endpoint, encode_request_body(req), timeout),
                               expected_dim);
}

std::string default_encoder_url() {
  const char* env = std::getenv("PAIRKB_ENCODER_URL");
  return env != nullptr ? std::string(env) : std::string();
}

RemoteEncoder::RemoteEncoder(RemoteConfig config, Modality modality)
    : config_(std::move(config)), modality_(modality) {
  if (config_.endpoint.empty()) config_.endpoint = default_encoder_url();
  if (config_.endpoint.empty()) {
    fail(ErrorCode::kInvalidArgument, "no encoder endpoint configured (PAIRKB_ENCODER_URL)");
  }
  parse_endpoint(config_.endpoint);
  if (config_.dim == 0) fail(ErrorCode::kInvalidArgument, "remote encoder dim must be positive");
  if (config_.max_in_flight < 1 || config_.max_in_flight > 1024) {
    fail(ErrorCode::kInvalidArgument, "max_in_flight must be in [1, 1024]");
  }
  in_flight_ = std::make_unique<std::counting_semaphore<1024>>(config_.max_in_flight);
}

Embedding RemoteEncoder::encode(std::string_view payload) const {
  in_flight_->acquire();
  struct Release {
    std::counting_semaphore<1024>& sem;
    ~Release() { sem.release(); }
  } release{*in_flight_};
  return remote_encode({modality_, std::string(payload)}, config_.endpoint, config_.timeout,
                       config_.dim);
}

RemoteCaptioner::RemoteCaptioner(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
  parse_endpoint(endpoint_);
}

std::string RemoteCaptioner::caption(std::string_view audio_ref) const {
  const auto body = post_json(endpoint_, json{{"audio_ref", std::string(audio_ref)}}.dump(),
                              timeout_);
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("caption") ||
      !doc["caption"].is_string() || doc["caption"].get<std::string>().empty()) {
    fail(ErrorCode::kMalformedResponse, "captioner response lacks a \"caption\" string");
  }
  return doc["caption"].get<std::string>();
}

std::unique_ptr<CaptionProvider> make_captioner(std::string_view spec) {
  if (spec.starts_with("table:")) {
    return std::make_unique<TableCaptioner>(load_caption_table(std::string(spec.substr(6))));
  }
  if (spec.starts_with("remote:")) {
    return std::make_unique<RemoteCaptioner>(std::string(spec.substr(7)),
                                             std::chrono::milliseconds(30000));
  }
  fail(ErrorCode::kInvalidArgument, "captioner spec must be table:<path> or remote:<url>");
}

std::unique_ptr<EncoderProvider> make_text_encoder(std::string_view spec, std::size_t dim) {
  if (spec.starts_with("table:")) {
    auto enc = std::make_unique<TableTextEncoder>(load_text_table(std::string(spec.substr(6))));
    if (enc->dim() != dim) {
      fail(ErrorCode::kDimMismatch, "text table dim " + std::to_string(enc->dim()) +
                                        " does not match KB text dim " + std::to_string(dim));
    }
    return enc;
  }
  if (spec.starts_with("remote:")) {
    RemoteConfig cfg;
    cfg.endpoint = std::string(spec.substr(7));
    cfg.dim = dim;
    return std::make_unique<RemoteEncoder>(std::move(cfg), Modality::kText);
  }
  fail(ErrorCode::kInvalidArgument, "text encoder spec must be table:<path> or remote:<url>");
}

}  // namespace pairkb
