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

#include "tiercache/verification.h"

#include "tiercache/errors.h"
#include "tiercache/hashing.h"

namespace tiercache {

JudgeDecision OracleJudge::Evaluate(const JudgeRequest& request) {
  return request.query_class_id == request.candidate->class_id ? JudgeDecision::kApprove
                                                               : JudgeDecision::kReject;
}

ScriptedJudge::ScriptedJudge(double false_approve, double false_reject, std::uint64_t seed,
                             std::map<PairKey, bool> overrides)
    : false_approve_(false_approve),
      false_reject_(false_reject),
      seed_(seed),
      overrides_(std::move(overrides)) {
  if (false_approve_ < 0.0 || false_approve_ > 1.0 || false_reject_ < 0.0 ||
      false_reject_ > 1.0) {
    throw ValidationError("judge error rates must lie in [0, 1]");
  }
}

JudgeDecision ScriptedJudge::Evaluate(const JudgeRequest& request) {
  const EntryId sid = request.candidate->entry_id;
  if (!overrides_.empty()) {
    auto it = overrides_.find(PairKey{std::string(request.query_prompt), sid});
    if (it != overrides_.end()) return it->second ? JudgeDecision::kApprove : JudgeDecision::kReject;
  }
  const double u = UnitFromHash(Mix(seed_, Fnv1a64(request.query_prompt), sid));
  const bool truth = request.query_class_id == request.candidate->class_id;
  const bool approve = truth ? !(u < false_reject_) : (u < false_approve_);
  return approve ? JudgeDecision::kApprove : JudgeDecision::kReject;
}

void VerifierConfig::Validate() const {
  if (verify_delay < 1) throw ValidationError("verify_delay must be >= 1");
  if (rate_limit && (rate_limit->calls < 1 || rate_limit->window < 1)) {
    throw ValidationError("rate limit needs calls >= 1 and window >= 1");
  }
  if (queue_capacity && *queue_capacity < 1) {
    throw ValidationError("queue_capacity must be >= 1 when set");
  }
  if (backoff_base < 1) throw ValidationError("backoff_base must be >= 1");
}

VerificationQueue::VerificationQueue(VerifierConfig config) : config_(config) {
  config_.Validate();
}

EnqueueOutcome VerificationQueue::Enqueue(VerificationTrigger trigger, Tick now) {
  DedupKey key{trigger.query_prompt_key, trigger.static_id};
  if (in_flight_.contains(key)) {
    ++stats_.deduplicated;
    return EnqueueOutcome::kDeduplicated;
  }
  if (config_.rate_limit) {
    // Window covers the last `window` indices: (now - window, now].
    const Tick w = config_.rate_limit->window;
    while (!window_.empty() && window_.front() + w <= now) window_.pop_front();
    if (window_.size() >= config_.rate_limit->calls) {
      ++stats_.throttled;
      return EnqueueOutcome::kThrottled;
    }
  }
  if (config_.queue_capacity && in_flight_.size() >= *config_.queue_capacity) {
    ++stats_.dropped_full;
    return EnqueueOutcome::kDroppedFull;
  }
  if (config_.rate_limit) window_.push_back(now);
  in_flight_.insert(std::move(key));
  const Tick mature = now + config_.verify_delay;
  pending_.emplace(std::pair{mature, seq_++}, Task{std::move(trigger), now, mature, 0});
  ++stats_.queued;
  return EnqueueOutcome::kQueued;
}

std::vector<PromotionCommand> VerificationQueue::Mature(Tick now, const StaticTier& tier,
                                                        Judge& judge) {
  std::vector<PromotionCommand> out;
  while (!pending_.empty() && pending_.begin()->first.first <= now) {
    auto node = pending_.extract(pending_.begin());
    Task& task = node.mapped();
    DedupKey key{task.trigger.query_prompt_key, task.trigger.static_id};
    const StaticEntry& candidate = tier.at(task.trigger.static_id);

    JudgeDecision decision;
    auto memo = config_.memoize_verdicts ? memo_.find(key) : memo_.end();
    if (memo != memo_.end()) {
      ++stats_.memo_hits;
      decision = memo->second ? JudgeDecision::kApprove : JudgeDecision::kReject;
    } else {
      if (task.attempts == 0) {
        ++stats_.judge_calls;
      } else {
        ++stats_.judge_retries;
      }
      decision = judge.Evaluate(
          JudgeRequest{task.trigger.query_prompt_key, task.trigger.query_class_id, &candidate});
    }

    if (decision == JudgeDecision::kFailure) {
      ++task.attempts;
      if (task.attempts <= config_.retry_budget) {
        Tick backoff = 1;
        for (std::uint32_t i = 0; i < task.attempts; ++i) backoff *= config_.backoff_base;
        task.mature_index = now + backoff;
        node.key() = {task.mature_index, node.key().second};
        pending_.insert(std::move(node));
      } else {
        ++stats_.failures_dropped;
        in_flight_.erase(key);
      }
      continue;
    }

    const bool approve = decision == JudgeDecision::kApprove;
    if (config_.memoize_verdicts) memo_.emplace(key, approve);
    in_flight_.erase(key);
    if (!approve) {
      ++stats_.rejections;
      continue;
    }
    ++stats_.approvals;
    out.push_back(PromotionCommand{std::move(task.trigger.query_prompt_key),
                                   task.trigger.query_class_id, task.trigger.static_id,
                                   std::move(task.trigger.query_embedding),
                                   task.trigger.trigger_index, now});
  }
  return out;
}

}  // namespace tiercache
