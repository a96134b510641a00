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

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tiercache/cache_tiers.h"
#include "tiercache/policy.h"
#include "tiercache/verification.h"
#include "tiercache/workload.h"

namespace tiercache {

enum class PolicyKind { kBaseline, kKrites };

enum class JudgeKind { kOracle, kScripted, kCommand, kHttp };

struct JudgeConfig {
  JudgeKind kind = JudgeKind::kOracle;
  // Scripted judge.
  double false_approve = 0.0;
  double false_reject = 0.0;
  std::uint64_t seed = 0;
  // External judges.
  std::string command;
  std::string endpoint;
  std::chrono::milliseconds timeout{5000};
};

struct SimConfig {
  PolicyKind policy = PolicyKind::kKrites;
  Thresholds thresholds;
  DynamicTierConfig dynamic{1000, std::nullopt};
  VerifierConfig verifier;
  JudgeConfig judge;
  bool verify_on_dynamic_hit = true;

  void Validate() const;
};

std::unique_ptr<Judge> MakeJudge(const JudgeConfig& cfg);

enum class RecordOrigin { kStaticDirect, kDynamicPromoted, kDynamicGenerated, kBackend };

struct ServeRecord {
  std::uint64_t request_id = 0;
  RecordOrigin origin = RecordOrigin::kBackend;
  std::optional<double> s_static;
  std::optional<double> s_dynamic;
  bool grey_zone = false;
  bool error = false;
  std::optional<EnqueueOutcome> verify_outcome;
  std::uint64_t judge_calls_so_far = 0;
  std::uint64_t approvals_so_far = 0;
  std::uint64_t rejections_so_far = 0;
  // Static entry id for static_direct, dynamic entry id for dynamic hits.
  std::optional<EntryId> served_entry_id;
  ClassId answer_class_id = 0;
  ClassId request_class_id = 0;
  std::string answer;
  // Promotions applied just before this request was served.
  std::vector<EntryId> promotions_applied;
  std::uint32_t promotions_superseded = 0;

  friend bool operator==(const ServeRecord&, const ServeRecord&) = default;
};

/// True when two records agree on everything the serving path decides:
/// origin, answer, similarities, served entry and error flag. Verification
/// bookkeeping (verify outcome, judge counters, promotions) is ignored.
bool SameServing(const ServeRecord& a, const ServeRecord& b);

/// One request at a time over a static tier, a dynamic tier and a
/// verification queue. Each Step runs, in order: maturation of due
/// verification tasks and their promotions, lookups, the policy decision,
/// tier mutations, enqueue of any trigger, and the record.
///
/// Copyable, so a run can be forked mid-stream. The static tier and judge
/// are borrowed and must outlive every copy.
class Simulation {
 public:
  Simulation(const StaticTier& tier, const SimConfig& cfg, Judge& judge);

  ServeRecord Step(const Request& request);

  Tick now() const { return now_; }
  const SimConfig& config() const { return cfg_; }
  void set_policy(PolicyKind p) { cfg_.policy = p; }
  const DynamicTier& dynamic_tier() const { return dynamic_; }
  const VerificationQueue& verifier() const { return queue_; }
  std::uint64_t promotions_applied() const { return promotions_applied_; }
  std::uint64_t promotions_superseded() const { return promotions_superseded_; }

 private:
  const StaticTier* tier_;
  SimConfig cfg_;
  Judge* judge_;
  DynamicTier dynamic_;
  VerificationQueue queue_;
  Tick now_ = 0;
  std::uint64_t promotions_applied_ = 0;
  std::uint64_t promotions_superseded_ = 0;
};

struct SimResult {
  std::vector<ServeRecord> records;
  DynamicTier final_tier;
  VerifierStats verifier;
  DynamicTierStats tier_stats;
  std::uint64_t promotions_applied = 0;
  std::uint64_t promotions_superseded = 0;
  std::size_t pending_at_end = 0;
};

/// Validates the config and stream/tier compatibility, then steps through
/// `stream` in order.
SimResult Run(std::span<const Request> stream, const SimConfig& cfg, const StaticTier& tier,
              Judge& judge);
SimResult Run(std::span<const Request> stream, const SimConfig& cfg, const StaticTier& tier);

struct PairedResult {
  SimResult baseline;
  SimResult krites;
};

/// Both policies over identical inputs with independent dynamic tiers.
PairedResult RunPaired(std::span<const Request> stream, const SimConfig& cfg,
                       const StaticTier& tier);

struct SweepCase {
  const std::vector<Request>* stream = nullptr;
  const StaticTier* tier = nullptr;
  SimConfig cfg;
};

/// Independent paired runs spread over OpenMP threads. Output order follows
/// `cases`; each run is deterministic, so results do not depend on the
/// thread count.
std::vector<PairedResult> RunPairedSweep(const std::vector<SweepCase>& cases);

std::string ToString(RecordOrigin o);
std::string ToString(EnqueueOutcome o);
std::string ToString(PolicyKind p);
std::string ToString(JudgeKind k);
RecordOrigin ParseRecordOrigin(const std::string& s);
EnqueueOutcome ParseEnqueueOutcome(const std::string& s);
PolicyKind ParsePolicyKind(const std::string& s);
JudgeKind ParseJudgeKind(const std::string& s);

}  // namespace tiercache
