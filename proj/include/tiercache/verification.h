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

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tiercache/cache_tiers.h"
#include "tiercache/policy.h"

namespace tiercache {

// ---------------------------------------------------------------------------
// Judges

enum class JudgeDecision { kApprove, kReject, kFailure };

struct JudgeRequest {
  std::string_view query_prompt;
  ClassId query_class_id = 0;
  const StaticEntry* candidate = nullptr;
};

/// Binary compatibility check: may `candidate->answer` be served for the
/// query? kFailure is reserved for transport problems in external judges.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual JudgeDecision Evaluate(const JudgeRequest& request) = 0;
};

/// Approves iff the query and the candidate share an equivalence class.
class OracleJudge final : public Judge {
 public:
  JudgeDecision Evaluate(const JudgeRequest& request) override;
};

/// Noisy judge for error-bound studies. The ground truth is the class
/// oracle; a mismatched pair is approved with probability `false_approve`
/// and a matched pair rejected with probability `false_reject`. The coin for
/// a pair is a hash of (seed, query prompt, static id), so verdicts do not
/// depend on call order. Entries in `overrides` are replayed verbatim.
class ScriptedJudge final : public Judge {
 public:
  using PairKey = std::pair<std::string, EntryId>;

  ScriptedJudge(double false_approve, double false_reject, std::uint64_t seed,
                std::map<PairKey, bool> overrides = {});

  JudgeDecision Evaluate(const JudgeRequest& request) override;

 private:
  double false_approve_;
  double false_reject_;
  std::uint64_t seed_;
  std::map<PairKey, bool> overrides_;
};

// ---------------------------------------------------------------------------
// Queue

struct RateLimit {
  std::uint64_t calls = 1;
  Tick window = 1;
};

struct VerifierConfig {
  // Requests between enqueue and maturation; >= 1 keeps judging off the
  // triggering request.
  Tick verify_delay = 1;
  std::optional<RateLimit> rate_limit;
  std::optional<std::size_t> queue_capacity;
  // Reuse the first verdict for a pair instead of judging it again.
  bool memoize_verdicts = false;
  // Extra attempts after a judge failure; attempt k waits backoff_base^k.
  std::uint32_t retry_budget = 1;
  Tick backoff_base = 2;

  void Validate() const;
};

enum class EnqueueOutcome { kQueued, kDeduplicated, kThrottled, kDroppedFull };

struct PromotionCommand {
  std::string prompt_key;
  ClassId query_class_id = 0;
  EntryId static_id = 0;
  Embedding embedding;
  Tick trigger_index = 0;
  Tick mature_index = 0;
};

struct VerifierStats {
  std::uint64_t queued = 0;
  std::uint64_t deduplicated = 0;
  std::uint64_t throttled = 0;
  std::uint64_t dropped_full = 0;
  // One per task verdict request; retries are counted separately.
  std::uint64_t judge_calls = 0;
  std::uint64_t judge_retries = 0;
  std::uint64_t approvals = 0;
  std::uint64_t rejections = 0;
  std::uint64_t failures_dropped = 0;
  std::uint64_t memo_hits = 0;
};

/// Off-path verification pipeline: dedup on (prompt key, static id) among
/// in-flight tasks, sliding-window rate limit on accepted tasks, optional
/// bound on in-flight tasks, delayed maturation, retry with backoff.
///
/// One producer (Enqueue) and one consumer (Mature); not synchronized.
class VerificationQueue {
 public:
  explicit VerificationQueue(VerifierConfig config);

  const VerifierConfig& config() const { return config_; }
  const VerifierStats& stats() const { return stats_; }
  std::size_t in_flight() const { return in_flight_.size(); }

  EnqueueOutcome Enqueue(VerificationTrigger trigger, Tick now);

  /// Judges every task with mature_index <= now, in (mature_index, enqueue
  /// order). Approved tasks become promotion commands in that order.
  std::vector<PromotionCommand> Mature(Tick now, const StaticTier& tier, Judge& judge);

 private:
  using DedupKey = std::pair<std::string, EntryId>;

  struct Task {
    VerificationTrigger trigger;
    Tick enqueue_index = 0;
    Tick mature_index = 0;
    std::uint32_t attempts = 0;
  };

  VerifierConfig config_;
  // Keyed by (mature_index, enqueue sequence).
  std::map<std::pair<Tick, std::uint64_t>, Task> pending_;
  std::set<DedupKey> in_flight_;
  std::deque<Tick> window_;
  std::map<DedupKey, bool> memo_;
  std::uint64_t seq_ = 0;
  VerifierStats stats_;
};

}  // namespace tiercache
