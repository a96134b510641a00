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

#include "tiercache/policy.h"

#include "tiercache/errors.h"

namespace tiercache {

namespace {

bool InUnitRange(double x) { return x >= -1.0 && x <= 1.0; }

}  // namespace

void Thresholds::Validate() const {
  if (!InUnitRange(tau_static) || !InUnitRange(tau_dynamic) || !InUnitRange(sigma_min)) {
    throw ValidationError("thresholds must lie in [-1, 1]");
  }
  if (sigma_min > tau_static) {
    throw ValidationError("sigma_min must not exceed tau_static");
  }
}

bool IsGreyZone(std::optional<double> s_static, const Thresholds& t) {
  return s_static && *s_static >= t.sigma_min && *s_static < t.tau_static;
}

ServeDecision DecideBaseline(const std::optional<StaticCandidate>& static_result,
                             const std::optional<DynamicCandidate>& dynamic_result,
                             const Thresholds& t, const BackendProvider& backend,
                             const Query& query) {
  ServeDecision d;
  if (static_result) d.static_neighbor = Neighbor{static_result->id, static_result->similarity};

  if (static_result && static_result->similarity >= t.tau_static) {
    d.origin = ServeOrigin::kStaticDirect;
    d.answer = std::string(static_result->answer);
    d.answer_class_id = static_result->class_id;
    return d;
  }

  if (dynamic_result) d.dynamic_neighbor = Neighbor{dynamic_result->id, dynamic_result->similarity};

  if (dynamic_result && dynamic_result->similarity >= t.tau_dynamic) {
    d.origin = ServeOrigin::kDynamicHit;
    d.answer = std::string(dynamic_result->answer);
    d.answer_class_id = dynamic_result->class_id;
    return d;
  }

  BackendAnswer generated = backend(query);
  d.origin = ServeOrigin::kBackend;
  d.answer = generated.answer;
  d.answer_class_id = generated.class_id;
  d.writeback = WritebackCommand{std::string(query.prompt_key), std::move(generated.answer),
                                 generated.class_id, *query.embedding};
  return d;
}

ServeDecision DecideKrites(const std::optional<StaticCandidate>& static_result,
                           const std::optional<DynamicCandidate>& dynamic_result,
                           const Thresholds& t, const BackendProvider& backend,
                           const Query& query, KritesOptions options) {
  ServeDecision d = DecideBaseline(static_result, dynamic_result, t, backend, query);
  if (d.origin == ServeOrigin::kStaticDirect) return d;
  if (d.origin == ServeOrigin::kDynamicHit && !options.verify_on_dynamic_hit) return d;
  if (!IsGreyZone(static_result ? std::optional(static_result->similarity) : std::nullopt, t)) {
    return d;
  }
  d.verify = VerificationTrigger{std::string(query.prompt_key), query.class_id, *query.embedding,
                                 static_result->id, query.index};
  return d;
}

}  // namespace tiercache
