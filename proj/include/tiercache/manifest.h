// Copyright 2026 The tiercache Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>

#include <json.hpp>

namespace tiercache {

/// Lowercase hex SHA-256 of a file's bytes. Throws IoError.
std::string Sha256File(const std::filesystem::path& path);

/// Everything needed to rerun a simulation: resolved config values, the
/// inputs with their digests, the outputs written, and the library version.
struct RunManifest {
  std::string version;
  nlohmann::ordered_json config;
  // Role ("static", "stream") -> path and digest.
  std::map<std::string, std::pair<std::string, std::string>> inputs;
  std::map<std::string, std::string> outputs;
  std::map<std::string, std::uint64_t> seeds;

  nlohmann::ordered_json ToJson() const;
  static RunManifest FromJson(const nlohmann::json& j);

  void Write(const std::filesystem::path& path) const;
  static RunManifest Read(const std::filesystem::path& path);

  /// Recomputes input digests; throws ValidationError naming the first
  /// input whose content changed.
  void VerifyInputs() const;
};

}  // namespace tiercache
