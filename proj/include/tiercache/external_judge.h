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
#include <string>

#include "tiercache/verification.h"

namespace tiercache {

// Adapters for judges that live outside the process. Both send the same
// payload, a single JSON object
//
//   {"query": ..., "cached_prompt": ..., "cached_answer": ...}
//
// and expect the reply body to be exactly APPROVE or REJECT, surrounding
// whitespace ignored. Any other reply, a non-zero exit, a non-200 status or
// a timeout is reported as JudgeDecision::kFailure; VerificationQueue owns
// the retry policy.

std::string JudgePayload(const JudgeRequest& request);

/// APPROVE / REJECT after trimming whitespace; anything else is kFailure.
JudgeDecision ParseJudgeReply(const std::string& reply);

/// Runs `command` through /bin/sh once per task, payload on stdin.
class CommandJudge final : public Judge {
 public:
  CommandJudge(std::string command, std::chrono::milliseconds timeout);
  JudgeDecision Evaluate(const JudgeRequest& request) override;

 private:
  std::string command_;
  std::chrono::milliseconds timeout_;
};

/// POSTs the payload to `url` (http://host[:port]/path).
class HttpJudge final : public Judge {
 public:
  HttpJudge(std::string url, std::chrono::milliseconds timeout);
  JudgeDecision Evaluate(const JudgeRequest& request) override;

 private:
  std::string origin_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

}  // namespace tiercache
