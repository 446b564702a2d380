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

#include "pairkb/config.h"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pairkb {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view value, std::size_t line_no) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::kConfigError, "line " + std::to_string(line_no) + ": \"" +
                                      std::string(value) + "\" is not a valid number");
  }
  return out;
}

double parse_double(std::string_view value, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const std::string s(value);
    const double d = std::stod(s, &used);
    if (used == s.size()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::kConfigError, "line " + std::to_string(line_no) + ": \"" + std::string(value) +
                                    "\" is not a valid number");
}

}  // namespace

std::filesystem::path EngineConfig::resolve(const std::filesystem::path& p) const {
  if (data_dir.empty() || p.is_absolute()) return p;
  return data_dir / p;
}

EngineConfig parse_config(std::string_view text) {
  EngineConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::kConfigError, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }

    if (key == "data_dir") {
      cfg.data_dir = std::string(value);
    } else if (key == "default_w") {
      cfg.default_w = parse_double(value, line_no);
      if (!(cfg.default_w >= 0.0 && cfg.default_w <= 1.0)) {
        fail(ErrorCode::kConfigError, "line " + std::to_string(line_no) + ": default_w must be in [0, 1]");
      }
    } else if (key == "exact_threshold") {
      cfg.exact_threshold = parse_number<std::size_t>(value, line_no);
    } else if (key == "overfetch_factor") {
      cfg.overfetch_factor = parse_number<std::size_t>(value, line_no);
      if (cfg.overfetch_factor == 0) {
        fail(ErrorCode::kConfigError, "line " + std::to_string(line_no) + ": overfetch_factor must be >= 1");
      }
    } else if (key == "index_kind") {
      if (value == "flat") {
        cfg.index_kind = IndexKind::kFlat;
      } else if (value == "clustered") {
        cfg.index_kind = IndexKind::kClustered;
      } else {
        fail(ErrorCode::kConfigError, "line " + std::to_string(line_no) + ": index_kind must be flat or clustered");
      }
    } else if (key == "n_clusters") {
      cfg.n_clusters = parse_number<std::size_t>(value, line_no);
    } else if (key == "n_probe") {
      cfg.n_probe = parse_number<std::size_t>(value, line_no);
    } else if (key == "encoder_url") {
      cfg.encoder_url = std::string(value);
    } else if (key == "captioner_url") {
      cfg.captioner_url = std::string(value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(value, line_no);
    } else if (key == "max_in_flight") {
      cfg.max_in_flight = parse_number<std::size_t>(value, line_no);
    } else if (key == "timeout_ms") {
      cfg.timeout_ms = parse_number<std::size_t>(value, line_no);
    } else {
      fail(ErrorCode::kConfigError,
           "line " + std::to_string(line_no) + ": unknown key \"" + std::string(key) + "\"");
    }
  }
  if (cfg.n_clusters == 0 || cfg.n_probe == 0 || cfg.n_probe > cfg.n_clusters) {
    fail(ErrorCode::kConfigError, "need 1 <= n_probe <= n_clusters");
  }
  return cfg;
}

EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_env_overrides(EngineConfig& config) {
  if (const char* dir = std::getenv("PAIRKB_DATA_DIR"); dir != nullptr && *dir != '\0') {
    config.data_dir = dir;
  }
  if (const char* url = std::getenv("PAIRKB_ENCODER_URL"); url != nullptr && *url != '\0') {
    config.encoder_url = url;
  }
}

}  // namespace pairkb
