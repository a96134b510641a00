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

#include "tiercache/external_judge.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <cerrno>

#include <httplib.h>
#include <json.hpp>

#include "tiercache/errors.h"

namespace tiercache {

std::string JudgePayload(const JudgeRequest& request) {
  nlohmann::json j = {
      {"query", std::string(request.query_prompt)},
      {"cached_prompt", request.candidate->canonical_prompt},
      {"cached_answer", request.candidate->answer},
  };
  return j.dump();
}

JudgeDecision ParseJudgeReply(const std::string& reply) {
  const auto first = reply.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return JudgeDecision::kFailure;
  const auto last = reply.find_last_not_of(" \t\r\n");
  const std::string token = reply.substr(first, last - first + 1);
  if (token == "APPROVE") return JudgeDecision::kApprove;
  if (token == "REJECT") return JudgeDecision::kReject;
  return JudgeDecision::kFailure;
}

CommandJudge::CommandJudge(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
  if (command_.empty()) throw ValidationError("judge command must not be empty");
  // A judge that exits without reading stdin must not kill the simulator.
  std::signal(SIGPIPE, SIG_IGN);
}

JudgeDecision CommandJudge::Evaluate(const JudgeRequest& request) {
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0) throw IoError("pipe failed for judge command: " + command_);
  if (pipe(from_child) != 0) {
    close(to_child[0]);
    close(to_child[1]);
    throw IoError("pipe failed for judge command: " + command_);
  }

  const pid_t pid = fork();
  if (pid < 0) throw IoError("fork failed for judge command: " + command_);
  if (pid == 0) {
    // Own process group so a timeout also reaches grandchildren.
    setpgid(0, 0);
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  close(to_child[0]);
  close(from_child[1]);

  const std::string payload = JudgePayload(request);
  std::size_t written = 0;
  while (written < payload.size()) {
    const ssize_t n = write(to_child[1], payload.data() + written, payload.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    written += static_cast<std::size_t>(n);
  }
  close(to_child[1]);

  std::string reply;
  bool timed_out = false;
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  char buf[512];
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{from_child[0], POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) {
      timed_out = ready == 0;
      break;
    }
    const ssize_t n = read(from_child[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    reply.append(buf, static_cast<std::size_t>(n));
  }
  close(from_child[0]);

  if (timed_out) kill(-pid, SIGKILL);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (timed_out || !WIFEXITED(status) || WEXITSTATUS(status) != 0) return JudgeDecision::kFailure;
  return ParseJudgeReply(reply);
}

HttpJudge::HttpJudge(std::string url, std::chrono::milliseconds timeout) : timeout_(timeout) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) throw ValidationError("judge endpoint must start with http://");
  const auto slash = url.find('/', scheme.size());
  origin_ = slash == std::string::npos ? url : url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
}

JudgeDecision HttpJudge::Evaluate(const JudgeRequest& request) {
  httplib::Client client(origin_);
  const auto secs = timeout_.count() / 1000;
  const auto usecs = (timeout_.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  auto res = client.Post(path_, JudgePayload(request), "application/json");
  if (!res || res->status != 200) return JudgeDecision::kFailure;
  return ParseJudgeReply(res->body);
}

}  // namespace tiercache
