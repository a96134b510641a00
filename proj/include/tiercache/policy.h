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

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "tiercache/cache_tiers.h"
#include "tiercache/embedding.h"
#include "tiercache/nearest_scan.h"

namespace tiercache {

// Serving-path decision logic. Everything here is a pure function of its
// arguments: the caller performs lookups, then applies the returned commands.

struct Thresholds {
  double tau_static = 0.92;
  double tau_dynamic = 0.92;
  // Lower edge of the grey zone [sigma_min, tau_static).
  double sigma_min = 0.0;

  /// Throws ValidationError unless all three lie in [-1, 1] and
  /// sigma_min <= tau_static.
  void Validate() const;
};

enum class ServeOrigin { kStaticDirect, kDynamicHit, kBackend };

struct Query {
  std::string_view prompt_key;
  ClassId class_id = 0;
  const Embedding* embedding = nullptr;
  Tick index = 0;
};

struct StaticCandidate {
  EntryId id = 0;
  double similarity = 0.0;
  std::string_view answer;
  ClassId class_id = 0;
};

struct DynamicCandidate {
  EntryId id = 0;
  double similarity = 0.0;
  std::string_view answer;
  ClassId class_id = 0;
  bool static_origin = false;
};

struct BackendAnswer {
  std::string answer;
  ClassId class_id = 0;
};

using BackendProvider = std::function<BackendAnswer(const Query&)>;

struct WritebackCommand {
  std::string prompt_key;
  std::string answer;
  ClassId answer_class_id = 0;
  Embedding embedding;
};

struct VerificationTrigger {
  std::string query_prompt_key;
  ClassId query_class_id = 0;
  Embedding query_embedding;
  EntryId static_id = 0;
  Tick trigger_index = 0;
};

struct ServeDecision {
  ServeOrigin origin = ServeOrigin::kBackend;
  std::string answer;
  ClassId answer_class_id = 0;
  std::optional<Neighbor> static_neighbor;
  std::optional<Neighbor> dynamic_neighbor;
  std::optional<WritebackCommand> writeback;
  std::optional<VerificationTrigger> verify;
};

struct KritesOptions {
  // When false, only backend misses trigger verification.
  bool verify_on_dynamic_hit = true;
};

/// sigma_min <= s < tau_static; false for an absent similarity.
bool IsGreyZone(std::optional<double> s_static, const Thresholds& t);

/// Static hit iff s_static >= tau_static, else dynamic hit iff
/// s_dynamic >= tau_dynamic, else a backend answer plus write-back.
ServeDecision DecideBaseline(const std::optional<StaticCandidate>& static_result,
                             const std::optional<DynamicCandidate>& dynamic_result,
                             const Thresholds& t, const BackendProvider& backend,
                             const Query& query);

/// The baseline decision, plus a verification trigger whenever the request
/// was not a static hit and its static similarity is in the grey zone.
ServeDecision DecideKrites(const std::optional<StaticCandidate>& static_result,
                           const std::optional<DynamicCandidate>& dynamic_result,
                           const Thresholds& t, const BackendProvider& backend,
                           const Query& query, KritesOptions options = {});

}  // namespace tiercache
