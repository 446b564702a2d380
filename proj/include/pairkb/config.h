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

// Engine configuration: a flat `key = value` document (comments with '#',
// optional double quotes around values) plus environment overrides
// PAIRKB_DATA_DIR and PAIRKB_ENCODER_URL. Unknown keys are rejected.

#include <filesystem>
#include <string>
#include <string_view>

#include "pairkb/index.h"
#include "pairkb/retrieval.h"

namespace pairkb {

struct EngineConfig {
  std::filesystem::path data_dir;
  double default_w = kDefaultWeight;
  std::size_t exact_threshold = 100'000;
  std::size_t overfetch_factor = 4;
  IndexKind index_kind = IndexKind::kFlat;
  std::size_t n_clusters = 16;
  std::size_t n_probe = 4;
  std::string encoder_url;
  std::string captioner_url;
  std::uint64_t seed = 42;
  std::size_t max_in_flight = 8;
  std::size_t timeout_ms = 5000;

  RetrieveOptions retrieve_options() const {
    return {exact_threshold, overfetch_factor, false};
  }
  ClusterParams cluster_params() const { return {n_clusters, n_probe, seed, 25}; }

  // Relative paths resolve against data_dir when one is set.
  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

// Throws kConfigError with the offending line.
EngineConfig parse_config(std::string_view text);
EngineConfig load_config(const std::filesystem::path& path);
// Applies PAIRKB_DATA_DIR / PAIRKB_ENCODER_URL when set.
void apply_env_overrides(EngineConfig& config);

}  // namespace pairkb
