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

#pragma once

// Sources of embeddings and generated captions. The engine never runs a
// model: embeddings come from precomputed stores, lookup tables (tests and
// audits) or a remote encoder service speaking a small JSON protocol.

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>

#include "pairkb/core.h"

namespace pairkb {

enum class Modality { kAudio, kText };
enum class ProviderKind { kFileBacked, kStub, kRemote };

std::string_view modality_name(Modality m);

class EncoderProvider {
 public:
  virtual ~EncoderProvider() = default;
  virtual ProviderKind kind() const = 0;
  virtual Modality modality() const = 0;
  virtual std::size_t dim() const = 0;
  // payload is raw text for the text modality and an audio locator for audio.
  // Always returns a unit vector of exactly dim().
  virtual Embedding encode(std::string_view payload) const = 0;
};

class CaptionProvider {
 public:
  virtual ~CaptionProvider() = default;
  virtual ProviderKind kind() const = 0;
  virtual std::string caption(std::string_view audio_ref) const = 0;
};

// --- table stubs -----------------------------------------------------------

using TextTable = std::map<std::string, Embedding, std::less<>>;
using CaptionTable = std::map<std::string, std::string, std::less<>>;

// Throws kUnknownCaption.
Embedding stub_text_encode(std::string_view caption, const TextTable& table);
// Throws kUnknownAudioRef.
std::string stub_caption(std::string_view audio_ref, const CaptionTable& table);

// JSON object {"caption": [floats], ...}.
TextTable load_text_table(const std::filesystem::path& path);
// JSON object {"audio_ref": "caption", ...}.
CaptionTable load_caption_table(const std::filesystem::path& path);

class TableTextEncoder final : public EncoderProvider {
 public:
  explicit TableTextEncoder(TextTable table);
  ProviderKind kind() const override { return ProviderKind::kStub; }
  Modality modality() const override { return Modality::kText; }
  std::size_t dim() const override { return dim_; }
  Embedding encode(std::string_view caption) const override;

 private:
  TextTable table_;
  std::size_t dim_ = 0;
};

class TableCaptioner final : public CaptionProvider {
 public:
  explicit TableCaptioner(CaptionTable table) : table_(std::move(table)) {}
  ProviderKind kind() const override { return ProviderKind::kStub; }
  std::string caption(std::string_view audio_ref) const override;

 private:
  CaptionTable table_;
};

// Looks embeddings up in a loaded knowledge base: audio by audio_uri, text
// by exact caption.
class StoreEncoder final : public EncoderProvider {
 public:
  StoreEncoder(std::shared_ptr<const KnowledgeBase> kb, Modality modality);
  ProviderKind kind() const override { return ProviderKind::kFileBacked; }
  Modality modality() const override { return modality_; }
  std::size_t dim() const override;
  Embedding encode(std::string_view payload) const override;

 private:
  std::shared_ptr<const KnowledgeBase> kb_;
  Modality modality_;
  std::map<std::string, std::size_t, std::less<>> lookup_;
};

// --- remote ----------------------------------------------------------------

struct RemoteEncodeRequest {
  Modality modality = Modality::kText;
  std::string payload;  // text, or audio_uri
};

struct HttpEndpoint {
  std::string scheme_host_port;  // "http://host:port"
  std::string path;              // "/encode"
};

// Accepts "http://host[:port][/path]". Throws kInvalidArgument.
HttpEndpoint parse_endpoint(std::string_view url);

std::string encode_request_body(const RemoteEncodeRequest& req);

// Validates a response body {"values": [...], "dim": n}. Throws
// kMalformedResponse, kDimMismatch, kNonFiniteResponse, kZeroVector.
Embedding parse_encode_response(std::string_view body, std::size_t expected_dim);

// One-shot call. Throws kTimeout, kTransportError, kHttpStatus plus the
// parse errors above.
Embedding remote_encode(const RemoteEncodeRequest& req, std::string_view endpoint,
                        std::chrono::milliseconds timeout, std::size_t expected_dim);

struct RemoteConfig {
  std::string endpoint;  // defaults to $PAIRKB_ENCODER_URL when empty
  std::size_t dim = 0;
  std::chrono::milliseconds timeout{5000};
  std::ptrdiff_t max_in_flight = 8;
};

std::string default_encoder_url();

class RemoteEncoder final : public EncoderProvider {
 public:
  RemoteEncoder(RemoteConfig config, Modality modality);
  ProviderKind kind() const override { return ProviderKind::kRemote; }
  Modality modality() const override { return modality_; }
  std::size_t dim() const override { return config_.dim; }
  Embedding encode(std::string_view payload) const override;

 private:
  RemoteConfig config_;
  Modality modality_;
  std::unique_ptr<std::counting_semaphore<1024>> in_flight_;
};

// POST {"audio_ref": "..."} -> {"caption": "..."}.
class RemoteCaptioner final : public CaptionProvider {
 public:
  RemoteCaptioner(std::string endpoint, std::chrono::milliseconds timeout);
  ProviderKind kind() const override { return ProviderKind::kRemote; }
  std::string caption(std::string_view audio_ref) const override;

 private:
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
};

// "table:<path.json>" or "remote:<url>" (empty url -> $PAIRKB_ENCODER_URL).
std::unique_ptr<CaptionProvider> make_captioner(std::string_view spec);
std::unique_ptr<EncoderProvider> make_text_encoder(std::string_view spec, std::size_t dim);

}  // namespace pairkb
