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

#include "tiercache/simulator.h"

#include <exception>

#include "tiercache/errors.h"
#include "tiercache/external_judge.h"

namespace tiercache {

void SimConfig::Validate() const {
  thresholds.Validate();
  dynamic.Validate();
  verifier.Validate();
  if (judge.kind == JudgeKind::kScripted &&
      !(judge.false_approve >= 0.0 && judge.false_approve <= 1.0 && judge.false_reject >= 0.0 &&
        judge.false_reject <= 1.0)) {
    throw ValidationError("scripted judge rates must lie in [0, 1]");
  }
  if (judge.kind == JudgeKind::kCommand && judge.command.empty()) {
    throw ValidationError("judge=command requires judge-command");
  }
  if (judge.kind == JudgeKind::kHttp && judge.endpoint.empty()) {
    throw ValidationError("judge=http requires judge-endpoint");
  }
}

std::unique_ptr<Judge> MakeJudge(const JudgeConfig& cfg) {
  switch (cfg.kind) {
    case JudgeKind::kOracle:
      return std::make_unique<OracleJudge>();
    case JudgeKind::kScripted:
      return std::make_unique<ScriptedJudge>(cfg.false_approve, cfg.false_reject, cfg.seed);
    case JudgeKind::kCommand:
      return std::make_unique<CommandJudge>(cfg.command, cfg.timeout);
    case JudgeKind::kHttp:
      return std::make_unique<HttpJudge>(cfg.endpoint, cfg.timeout);
  }
  throw ValidationError("unknown judge kind");
}

bool SameServing(const ServeRecord& a, const ServeRecord& b) {
  return a.request_id == b.request_id && a.origin == b.origin && a.s_static == b.s_static &&
         a.s_dynamic == b.s_dynamic && a.grey_zone == b.grey_zone && a.error == b.error &&
         a.served_entry_id == b.served_entry_id && a.answer_class_id == b.answer_class_id &&
         a.request_class_id == b.request_class_id && a.answer == b.answer;
}

Simulation::Simulation(const StaticTier& tier, const SimConfig& cfg, Judge& judge)
    : tier_(&tier),
      cfg_(cfg),
      judge_(&judge),
      dynamic_(tier.dimension(), cfg.dynamic),
      queue_(cfg.verifier) {}

ServeRecord Simulation::Step(const Request& request) {
  const Tick t = now_++;
  ServeRecord rec;
  rec.request_id = request.request_id;
  rec.request_class_id = request.class_id;

  for (PromotionCommand& cmd : queue_.Mature(t, *tier_, *judge_)) {
    const PromotionResult res = dynamic_.UpsertPromotion(
        cmd.prompt_key, tier_->at(cmd.static_id), cmd.embedding, cmd.trigger_index, t);
    if (res.outcome == PromotionOutcome::kApplied) {
      rec.promotions_applied.push_back(res.entry_id);
      ++promotions_applied_;
    } else {
      ++rec.promotions_superseded;
      ++promotions_superseded_;
    }
  }

  const Thresholds& th = cfg_.thresholds;
  std::optional<StaticCandidate> static_result;
  if (auto m = tier_->Lookup(request.embedding)) {
    static_result = StaticCandidate{m->entry->entry_id, m->similarity, m->entry->answer,
                                    m->entry->class_id};
  }

  std::optional<DynamicCandidate> dynamic_result;
  if (!static_result || static_result->similarity < th.tau_static) {
    if (auto m = dynamic_.Lookup(request.embedding, t)) {
      dynamic_result = DynamicCandidate{m->entry->entry_id, m->similarity, m->entry->answer,
                                        m->entry->answer_class_id, m->entry->static_origin};
    }
  }

  const Query query{request.prompt_text, request.class_id, &request.embedding, t};
  const BackendProvider backend = [&request](const Query&) {
    return BackendAnswer{"backend-answer:" + std::to_string(request.request_id), request.class_id};
  };
  ServeDecision decision =
      cfg_.policy == PolicyKind::kKrites
          ? DecideKrites(static_result, dynamic_result, th, backend, query,
                         KritesOptions{cfg_.verify_on_dynamic_hit})
          : DecideBaseline(static_result, dynamic_result, th, backend, query);

  if (static_result) rec.s_static = static_result->similarity;
  if (dynamic_result) rec.s_dynamic = dynamic_result->similarity;
  rec.grey_zone = IsGreyZone(rec.s_static, th);
  rec.answer = decision.answer;
  rec.answer_class_id = decision.answer_class_id;

  switch (decision.origin) {
    case ServeOrigin::kStaticDirect:
      rec.origin = RecordOrigin::kStaticDirect;
      rec.served_entry_id = static_result->id;
      break;
    case ServeOrigin::kDynamicHit:
      rec.origin = dynamic_result->static_origin ? RecordOrigin::kDynamicPromoted
                                                 : RecordOrigin::kDynamicGenerated;
      rec.served_entry_id = dynamic_result->id;
      dynamic_.Touch(dynamic_result->id, t);
      break;
    case ServeOrigin::kBackend:
      rec.origin = RecordOrigin::kBackend;
      dynamic_.InsertWriteback(decision.writeback->prompt_key, decision.writeback->answer,
                               decision.writeback->answer_class_id, decision.writeback->embedding,
                               t);
      break;
  }

  if (decision.verify) rec.verify_outcome = queue_.Enqueue(std::move(*decision.verify), t);

  rec.error = rec.origin != RecordOrigin::kBackend && rec.answer_class_id != request.class_id;
  rec.judge_calls_so_far = queue_.stats().judge_calls;
  rec.approvals_so_far = queue_.stats().approvals;
  rec.rejections_so_far = queue_.stats().rejections;
  return rec;
}

SimResult Run(std::span<const Request> stream, const SimConfig& cfg, const StaticTier& tier,
              Judge& judge) {
  cfg.Validate();
  for (const Request& r : stream) {
    if (r.embedding.dimension() != tier.dimension()) {
      throw ValidationError("request " + std::to_string(r.request_id) + " has dimension " +
                            std::to_string(r.embedding.dimension()) + ", static tier has " +
                            std::to_string(tier.dimension()));
    }
  }
  Simulation sim(tier, cfg, judge);
  std::vector<ServeRecord> records;
  records.reserve(stream.size());
  for (const Request& r : stream) records.push_back(sim.Step(r));
  return SimResult{std::move(records),
                   sim.dynamic_tier(),
                   sim.verifier().stats(),
                   sim.dynamic_tier().stats(),
                   sim.promotions_applied(),
                   sim.promotions_superseded(),
                   sim.verifier().in_flight()};
}

SimResult Run(std::span<const Request> stream, const SimConfig& cfg, const StaticTier& tier) {
  cfg.Validate();
  auto judge = MakeJudge(cfg.judge);
  return Run(stream, cfg, tier, *judge);
}

PairedResult RunPaired(std::span<const Request> stream, const SimConfig& cfg,
                       const StaticTier& tier) {
  SimConfig base = cfg;
  base.policy = PolicyKind::kBaseline;
  SimConfig krites = cfg;
  krites.policy = PolicyKind::kKrites;
  // Run() validates, then each policy gets a fresh judge instance.
  SimResult b = Run(stream, base, tier);
  SimResult k = Run(stream, krites, tier);
  return PairedResult{std::move(b), std::move(k)};
}

std::vector<PairedResult> RunPairedSweep(const std::vector<SweepCase>& cases) {
  std::vector<std::optional<PairedResult>> slots(cases.size());
  std::vector<std::exception_ptr> errors(cases.size());
  const auto n = static_cast<std::int64_t>(cases.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const SweepCase& c = cases[idx];
      slots[idx] = RunPaired(*c.stream, c.cfg, *c.tier);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<PairedResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::string ToString(RecordOrigin o) {
  switch (o) {
    case RecordOrigin::kStaticDirect: return "static_direct";
    case RecordOrigin::kDynamicPromoted: return "dynamic_promoted";
    case RecordOrigin::kDynamicGenerated: return "dynamic_generated";
    case RecordOrigin::kBackend: return "backend";
  }
  return "?";
}

std::string ToString(EnqueueOutcome o) {
  switch (o) {
    case EnqueueOutcome::kQueued: return "queued";
    case EnqueueOutcome::kDeduplicated: return "deduplicated";
    case EnqueueOutcome::kThrottled: return "throttled";
    case EnqueueOutcome::kDroppedFull: return "dropped_full";
  }
  return "?";
}

std::string ToString(PolicyKind p) { return p == PolicyKind::kBaseline ? "baseline" : "krites"; }

std::string ToString(JudgeKind k) {
  switch (k) {
    case JudgeKind::kOracle: return "oracle";
    case JudgeKind::kScripted: return "scripted";
    case JudgeKind::kCommand: return "command";
    case JudgeKind::kHttp: return "http";
  }
  return "?";
}

RecordOrigin ParseRecordOrigin(const std::string& s) {
  if (s == "static_direct") return RecordOrigin::kStaticDirect;
  if (s == "dynamic_promoted") return RecordOrigin::kDynamicPromoted;
  if (s == "dynamic_generated") return RecordOrigin::kDynamicGenerated;
  if (s == "backend") return RecordOrigin::kBackend;
  throw ValidationError("unknown origin '" + s + "'");
}

EnqueueOutcome ParseEnqueueOutcome(const std::string& s) {
  if (s == "queued") return EnqueueOutcome::kQueued;
  if (s == "deduplicated") return EnqueueOutcome::kDeduplicated;
  if (s == "throttled") return EnqueueOutcome::kThrottled;
  if (s == "dropped_full") return EnqueueOutcome::kDroppedFull;
  throw ValidationError("unknown verify outcome '" + s + "'");
}

PolicyKind ParsePolicyKind(const std::string& s) {
  if (s == "baseline") return PolicyKind::kBaseline;
  if (s == "krites") return PolicyKind::kKrites;
  throw ValidationError("unknown policy '" + s + "'");
}

JudgeKind ParseJudgeKind(const std::string& s) {
  if (s == "oracle") return JudgeKind::kOracle;
  if (s == "scripted") return JudgeKind::kScripted;
  if (s == "command") return JudgeKind::kCommand;
  if (s == "http") return JudgeKind::kHttp;
  throw ValidationError("unknown judge '" + s + "'");
}

}  // namespace tiercache
