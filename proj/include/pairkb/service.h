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

// HTTP facade over an immutable knowledge-base snapshot.
//
//   POST /search        retrieval with any strategy
//   POST /refine        refined-KB construction (async by default)
//   GET  /refine        status and report of the last refine job
//   POST /classify      zero-shot classification with score fusion
//   GET  /entries/{id}  entry metadata
//   GET  /healthz       {status, snapshot_id, kb_size}
//   POST /reload        load a KB file and swap the snapshot atomically
//
// Each request pins the snapshot current at its start and uses only that.

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "pairkb/config.h"
#include "pairkb/core.h"
#include "pairkb/providers.h"
#include "pairkb/refine.h"
#include "pairkb/retrieval.h"

namespace httplib {
class Server;
}

namespace pairkb {

struct KbBundle {
  std::shared_ptr<const KnowledgeBase> kb;
  IndexSet indexes;
  std::shared_ptr<const EncoderProvider> text_encoder;  // configured or remote
};

struct Snapshot {
  std::uint64_t id = 0;
  KbBundle primary;
  std::map<std::string, KbBundle> named;  // refine outputs
  std::filesystem::path source;
};

struct ServiceProviders {
  std::shared_ptr<const CaptionProvider> captioner;
  std::shared_ptr<const EncoderProvider> text_encoder;
  std::shared_ptr<const EncoderProvider> audio_encoder;
};

struct HttpReply {
  int status = 200;
  std::string body;
};

// Maps library error codes onto HTTP statuses.
int http_status_for(ErrorCode code);

class Service {
 public:
  explicit Service(EngineConfig config, ServiceProviders providers = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Builds indexes and swaps in a new snapshot.
  void load(const std::filesystem::path& kb_path);
  void install(KnowledgeBase kb, std::filesystem::path source = {});
  std::shared_ptr<const Snapshot> snapshot() const;

  HttpReply search(std::string_view body) const;
  HttpReply refine(std::string_view body);
  HttpReply refine_status() const;
  HttpReply classify(std::string_view body) const;
  HttpReply entry(std::string_view id) const;
  HttpReply healthz() const;
  HttpReply reload(std::string_view body);

  // Binds (port 0 picks a free port), serves on a background thread and
  // returns the bound port. Throws kIoError when binding fails.
  int start(const std::string& host, int port);
  // Blocking variant for the CLI.
  void listen(const std::string& host, int port);
  void stop();

 private:
  KbBundle bundle(KnowledgeBase kb) const;
  void register_named(const std::string& name, KnowledgeBase kb);
  void route();

  EngineConfig config_;
  ServiceProviders providers_;

  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::atomic<std::uint64_t> next_snapshot_id_{1};

  std::atomic<bool> refine_running_{false};
  mutable std::mutex refine_mu_;
  std::string refine_state_ = "idle";
  std::optional<RefineReport> refine_report_;
  std::string refine_error_;
  std::optional<ErrorCode> refine_error_code_;
  std::mutex worker_mu_;
  std::jthread refine_worker_;

  std::unique_ptr<httplib::Server> server_;
  std::jthread server_thread_;
};

}  // namespace pairkb
