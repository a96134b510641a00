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

// tiercache: generate workloads, build static tiers, run simulations and
// compare policies. Every option below is also a key in the flat config
// file given with --config (TOML-style "key = value" lines); a flag on the
// command line overrides the file.
//
// Exit codes: 0 success, 1 validation error, 2 runtime or IO error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tiercache/cache_tiers.h"
#include "tiercache/errors.h"
#include "tiercache/manifest.h"
#include "tiercache/reporting.h"
#include "tiercache/simulator.h"
#include "tiercache/workload.h"

namespace fs = std::filesystem;
using namespace tiercache;

namespace {

constexpr int kConfigVersion = 1;

struct Options {
  int config_version = kConfigVersion;

  // Simulation.
  std::string policy = "paired";
  double tau_static = 0.92;
  double tau_dynamic = 0.92;
  double sigma_min = 0.0;
  std::uint64_t verify_delay = 1;
  std::string judge = "oracle";
  double epsilon = 0.0;
  double false_reject = 0.0;
  std::uint64_t judge_seed = 0;
  std::string judge_command;
  std::string judge_endpoint;
  std::uint64_t judge_timeout_ms = 5000;
  std::uint32_t judge_retries = 1;
  double judge_cost = -1.0;
  std::uint64_t capacity = 1000;
  std::uint64_t ttl = 0;
  std::uint64_t rate_limit_calls = 0;
  std::uint64_t rate_limit_window = 1;
  std::uint64_t queue_capacity = 0;
  bool memoize_verdicts = false;
  bool verify_on_dynamic_hit = true;
  std::uint64_t bucket = 100;

  // Workload.
  std::uint64_t seed = 0;
  double coverage = 0.6;
  double history_fraction = 0.2;
  std::uint64_t classes = 100;
  double zipf = 1.0;
  std::uint64_t requests = 10000;
  std::uint64_t dimension = 64;
  double intra_mean = 0.9;
  double intra_spread = 0.0;
  std::uint64_t paraphrases = 8;
  double paraphrase_zipf = 0.0;
};

nlohmann::ordered_json SimulationConfigJson(const Options& o) {
  nlohmann::ordered_json j;
  j["config-version"] = o.config_version;
  j["policy"] = o.policy;
  j["tau-static"] = o.tau_static;
  j["tau-dynamic"] = o.tau_dynamic;
  j["sigma-min"] = o.sigma_min;
  j["verify-delay"] = o.verify_delay;
  j["judge"] = o.judge;
  j["epsilon"] = o.epsilon;
  j["false-reject"] = o.false_reject;
  j["judge-seed"] = o.judge_seed;
  j["judge-command"] = o.judge_command;
  j["judge-endpoint"] = o.judge_endpoint;
  j["judge-timeout-ms"] = o.judge_timeout_ms;
  j["judge-retries"] = o.judge_retries;
  j["judge-cost"] = o.judge_cost;
  j["capacity"] = o.capacity;
  j["ttl"] = o.ttl;
  j["rate-limit-calls"] = o.rate_limit_calls;
  j["rate-limit-window"] = o.rate_limit_window;
  j["queue-capacity"] = o.queue_capacity;
  j["memoize-verdicts"] = o.memoize_verdicts;
  j["verify-on-dynamic-hit"] = o.verify_on_dynamic_hit;
  j["bucket"] = o.bucket;
  return j;
}

void ApplySimulationConfig(const nlohmann::json& j, Options& o) {
  try {
    o.config_version = j.at("config-version").get<int>();
    o.policy = j.at("policy").get<std::string>();
    o.tau_static = j.at("tau-static").get<double>();
    o.tau_dynamic = j.at("tau-dynamic").get<double>();
    o.sigma_min = j.at("sigma-min").get<double>();
    o.verify_delay = j.at("verify-delay").get<std::uint64_t>();
    o.judge = j.at("judge").get<std::string>();
    o.epsilon = j.at("epsilon").get<double>();
    o.false_reject = j.at("false-reject").get<double>();
    o.judge_seed = j.at("judge-seed").get<std::uint64_t>();
    o.judge_command = j.at("judge-command").get<std::string>();
    o.judge_endpoint = j.at("judge-endpoint").get<std::string>();
    o.judge_timeout_ms = j.at("judge-timeout-ms").get<std::uint64_t>();
    o.judge_retries = j.at("judge-retries").get<std::uint32_t>();
    o.judge_cost = j.at("judge-cost").get<double>();
    o.capacity = j.at("capacity").get<std::uint64_t>();
    o.ttl = j.at("ttl").get<std::uint64_t>();
    o.rate_limit_calls = j.at("rate-limit-calls").get<std::uint64_t>();
    o.rate_limit_window = j.at("rate-limit-window").get<std::uint64_t>();
    o.queue_capacity = j.at("queue-capacity").get<std::uint64_t>();
    o.memoize_verdicts = j.at("memoize-verdicts").get<bool>();
    o.verify_on_dynamic_hit = j.at("verify-on-dynamic-hit").get<bool>();
    o.bucket = j.at("bucket").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest config is incomplete: ") + e.what());
  }
}

SimConfig ToSimConfig(const Options& o) {
  if (o.config_version != kConfigVersion) {
    throw ValidationError("unsupported config-version " + std::to_string(o.config_version));
  }
  SimConfig cfg;
  if (o.policy != "paired") cfg.policy = ParsePolicyKind(o.policy);
  cfg.thresholds = Thresholds{o.tau_static, o.tau_dynamic, o.sigma_min};
  cfg.dynamic.capacity = o.capacity;
  if (o.ttl > 0) cfg.dynamic.ttl = o.ttl;
  cfg.verifier.verify_delay = o.verify_delay;
  if (o.rate_limit_calls > 0) cfg.verifier.rate_limit = RateLimit{o.rate_limit_calls, o.rate_limit_window};
  if (o.queue_capacity > 0) cfg.verifier.queue_capacity = o.queue_capacity;
  cfg.verifier.memoize_verdicts = o.memoize_verdicts;
  cfg.verifier.retry_budget = o.judge_retries;
  cfg.judge.kind = ParseJudgeKind(o.judge);
  cfg.judge.false_approve = o.epsilon;
  cfg.judge.false_reject = o.false_reject;
  cfg.judge.seed = o.judge_seed;
  cfg.judge.command = o.judge_command;
  cfg.judge.endpoint = o.judge_endpoint;
  cfg.judge.timeout = std::chrono::milliseconds(o.judge_timeout_ms);
  cfg.verify_on_dynamic_hit = o.verify_on_dynamic_hit;
  cfg.Validate();
  if (o.bucket < 1) throw ValidationError("bucket must be >= 1");
  return cfg;
}

SynthConfig ToSynthConfig(const Options& o) {
  SynthConfig s;
  s.num_classes = o.classes;
  s.zipf_exponent = o.zipf;
  s.requests = o.requests;
  s.dimension = o.dimension;
  s.intra_mean = o.intra_mean;
  s.intra_spread = o.intra_spread;
  s.paraphrases_per_class = o.paraphrases;
  s.paraphrase_zipf_exponent = o.paraphrase_zipf;
  s.seed = o.seed;
  try {
    s.Validate();
  } catch (const StructuralError& e) {
    throw ValidationError(e.what());
  }
  return s;
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream OpenIn(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

int CmdGenerate(const Options& o, const fs::path& out_path) {
  const SynthConfig cfg = ToSynthConfig(o);
  WriteTraceFile(out_path, Synthesize(cfg));
  std::cout << "wrote " << cfg.requests << " requests (" << cfg.num_classes << " classes, d="
            << cfg.dimension << ") to " << out_path.string() << '\n';
  return 0;
}

int CmdBuildStatic(const Options& o, const fs::path& trace, const fs::path& static_out,
                   const fs::path& eval_out) {
  SplitConfig split{o.history_fraction, o.seed, o.coverage};
  split.Validate();
  std::vector<Request> requests = LoadTraceFile(trace);
  if (requests.empty()) throw ValidationError("trace " + trace.string() + " is empty");
  Split parts = ShuffleAndSplit(std::move(requests), split);
  if (parts.history.empty()) {
    throw ValidationError("history prefix is empty; raise history-fraction or supply more requests");
  }
  const StaticBuild build = BuildStaticEntries(parts.history, split.coverage);

  auto sout = OpenOut(static_out);
  WriteStaticEntries(sout, build.entries);
  if (!sout) throw IoError("write failed for " + static_out.string());
  WriteTraceFile(eval_out, parts.evaluation);

  std::cout << "history requests:   " << parts.history.size() << '\n'
            << "evaluation requests: " << parts.evaluation.size() << '\n'
            << "static entries:     " << build.entries.size() << '\n'
            << "coverage achieved:  " << build.coverage_achieved << " (" << build.covered_requests
            << "/" << parts.history.size() << ", target " << split.coverage << ")\n";
  return 0;
}

struct SimulateArgs {
  fs::path static_path;
  fs::path stream_path;
  fs::path out_dir;
  fs::path manifest;
};

int CmdSimulate(Options o, SimulateArgs args) {
  RunManifest replay;
  if (!args.manifest.empty()) {
    replay = RunManifest::Read(args.manifest);
    replay.VerifyInputs();
    ApplySimulationConfig(replay.config, o);
    if (!replay.inputs.contains("static") || !replay.inputs.contains("stream")) {
      throw ValidationError("manifest lacks static/stream inputs");
    }
    args.static_path = replay.inputs.at("static").first;
    args.stream_path = replay.inputs.at("stream").first;
  }
  if (args.static_path.empty() || args.stream_path.empty()) {
    throw ValidationError("simulate needs STATIC and STREAM files, or --manifest");
  }
  const SimConfig cfg = ToSimConfig(o);

  auto sin = OpenIn(args.static_path);
  std::vector<StaticEntrySpec> specs;
  try {
    specs = LoadStaticEntries(sin);
  } catch (const IngestError& e) {
    throw IngestError(e.line(), args.static_path.string() + ": " + e.what());
  }
  const std::vector<Request> stream = LoadTraceFile(args.stream_path);
  if (stream.empty()) throw ValidationError("evaluation stream " + args.stream_path.string() + " is empty");
  const std::size_t dim = stream.front().embedding.dimension();
  if (!specs.empty() && specs.front().embedding.dimension() != dim) {
    throw ValidationError("static tier dimension " +
                          std::to_string(specs.front().embedding.dimension()) +
                          " does not match stream dimension " + std::to_string(dim));
  }
  const StaticTier tier = StaticTier::Build(dim, std::move(specs));

  ReportOptions ropt;
  ropt.epsilon = cfg.judge.kind == JudgeKind::kScripted ? o.epsilon : 0.0;
  if (o.judge_cost >= 0.0) ropt.judge_cost = o.judge_cost;

  std::vector<std::pair<std::string, SimResult>> runs;
  if (o.policy == "paired") {
    PairedResult paired = RunPaired(stream, cfg, tier);
    runs.emplace_back("baseline", std::move(paired.baseline));
    runs.emplace_back("krites", std::move(paired.krites));
  } else {
    runs.emplace_back(o.policy, Run(stream, cfg, tier));
  }

  fs::create_directories(args.out_dir);
  nlohmann::ordered_json summary;
  summary["version"] = TIERCACHE_VERSION;
  summary["policy"] = o.policy;
  summary["metadata"] = {{"embeddings_normalized_on_ingest", true},
                         {"static_entries", tier.size()},
                         {"dimension", dim}};
  std::vector<CurveSeries> curves;
  std::vector<SummaryReport> reports;
  std::vector<std::pair<std::string, std::span<const ServeRecord>>> record_sets;
  for (const auto& [name, result] : runs) {
    SummaryReport rep = Summarize(result.records, ropt);
    nlohmann::ordered_json j = ToJson(rep);
    j["verifier"] = {{"judge_retries", result.verifier.judge_retries},
                     {"failures_dropped", result.verifier.failures_dropped},
                     {"memo_hits", result.verifier.memo_hits},
                     {"pending_at_end", result.pending_at_end}};
    j["dynamic_tier"] = {{"final_size", result.final_tier.size()},
                         {"evictions", result.tier_stats.evictions},
                         {"promoted_evictions", result.tier_stats.promoted_evictions},
                         {"expirations", result.tier_stats.expirations}};
    summary["runs"][name] = j;
    curves.push_back(Curve(result.records, o.bucket, name));
    reports.push_back(std::move(rep));
    record_sets.emplace_back(name, result.records);
  }
  if (reports.size() == 2) {
    const ComparisonReport cmp = Compare(reports[0], reports[1]);
    summary["comparison"] = ToJson(cmp);
    std::cout << FormatComparisonTable(cmp);
  } else {
    std::cout << "static-origin served fraction: " << reports[0].static_origin_fraction
              << ", hit rate: " << reports[0].hit_rate << ", error rate: " << reports[0].error_rate
              << '\n';
  }

  {
    auto out = OpenOut(args.out_dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  {
    auto out = OpenOut(args.out_dir / "records.csv");
    WriteRecordsCsv(out, record_sets);
  }
  {
    auto out = OpenOut(args.out_dir / "curves.csv");
    WriteCurvesCsv(out, curves);
  }

  RunManifest m;
  m.version = TIERCACHE_VERSION;
  m.config = SimulationConfigJson(o);
  const auto abs_static = fs::absolute(args.static_path).lexically_normal().string();
  const auto abs_stream = fs::absolute(args.stream_path).lexically_normal().string();
  m.inputs["static"] = {abs_static, Sha256File(abs_static)};
  m.inputs["stream"] = {abs_stream, Sha256File(abs_stream)};
  m.outputs = {{"summary", "summary.json"}, {"records", "records.csv"}, {"curves", "curves.csv"}};
  m.seeds = {{"judge-seed", o.judge_seed}};
  m.Write(args.out_dir / "manifest.json");
  return 0;
}

int CmdReport(const Options& o, const std::vector<fs::path>& files, const fs::path& out_path) {
  std::vector<std::vector<ServeRecord>> streams;
  for (const fs::path& f : files) {
    auto in = OpenIn(f);
    std::map<std::string, std::vector<ServeRecord>> by_policy;
    try {
      by_policy = ReadRecordsCsv(in);
    } catch (const IngestError& e) {
      throw IngestError(e.line(), f.string() + ": " + e.what());
    }
    if (by_policy.empty()) throw ValidationError(f.string() + " holds no records");
    if (files.size() == 1) {
      if (!by_policy.contains("baseline") || !by_policy.contains("krites")) {
        throw ValidationError(f.string() + " must hold both baseline and krites rows");
      }
      streams.push_back(std::move(by_policy.at("baseline")));
      streams.push_back(std::move(by_policy.at("krites")));
    } else {
      if (by_policy.size() != 1) throw ValidationError(f.string() + " holds more than one policy");
      streams.push_back(std::move(by_policy.begin()->second));
    }
  }
  if (streams[0].size() != streams[1].size()) {
    throw ValidationError("record streams differ in length: " + std::to_string(streams[0].size()) +
                          " vs " + std::to_string(streams[1].size()));
  }
  ReportOptions ropt;
  ropt.epsilon = o.epsilon;
  const ComparisonReport cmp = Compare(Summarize(streams[0], ropt), Summarize(streams[1], ropt));
  const std::string table = FormatComparisonTable(cmp);
  std::cout << table;
  if (!out_path.empty()) {
    auto out = OpenOut(out_path);
    out << table;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tiered semantic cache simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat key = value config file");

  Options o;
  app.add_option("--config-version", o.config_version, "Config format version");
  app.add_option("--policy", o.policy, "baseline | krites | paired")
      ->check(CLI::IsMember({"baseline", "krites", "paired"}));
  app.add_option("--tau-static", o.tau_static, "Static-tier similarity threshold");
  app.add_option("--tau-dynamic", o.tau_dynamic, "Dynamic-tier similarity threshold");
  app.add_option("--sigma-min", o.sigma_min, "Lower edge of the grey zone");
  app.add_option("--verify-delay", o.verify_delay, "Requests between enqueue and maturation");
  app.add_option("--judge", o.judge, "oracle | scripted | command | http")
      ->check(CLI::IsMember({"oracle", "scripted", "command", "http"}));
  app.add_option("--epsilon", o.epsilon, "Scripted judge false-approve rate");
  app.add_option("--false-reject", o.false_reject, "Scripted judge false-reject rate");
  app.add_option("--judge-seed", o.judge_seed, "Scripted judge seed");
  app.add_option("--judge-command", o.judge_command, "Shell command for judge=command");
  app.add_option("--judge-endpoint", o.judge_endpoint, "URL for judge=http");
  app.add_option("--judge-timeout-ms", o.judge_timeout_ms, "External judge timeout");
  app.add_option("--judge-retries", o.judge_retries, "Retries after an external judge failure");
  app.add_option("--judge-cost", o.judge_cost, "Cost per judge call (negative: not reported)");
  app.add_option("--capacity", o.capacity, "Dynamic tier capacity (entries)");
  app.add_option("--ttl", o.ttl, "Dynamic tier TTL in requests (0: none)");
  app.add_option("--rate-limit-calls", o.rate_limit_calls, "Judge tasks per window (0: unlimited)");
  app.add_option("--rate-limit-window", o.rate_limit_window, "Rate-limit window in requests");
  app.add_option("--queue-capacity", o.queue_capacity, "Max in-flight tasks (0: unbounded)");
  app.add_option("--memoize-verdicts", o.memoize_verdicts, "Reuse verdicts per (query, static) pair");
  app.add_option("--verify-on-dynamic-hit", o.verify_on_dynamic_hit,
                 "Also trigger verification on grey-zone dynamic hits");
  app.add_option("--bucket", o.bucket, "Curve sampling interval in requests");
  app.add_option("--seed", o.seed, "Generator seed (generate) or shuffle seed (build-static)");
  app.add_option("--coverage", o.coverage, "History coverage target for static selection");
  app.add_option("--history-fraction", o.history_fraction, "Share of the trace used as history");
  app.add_option("--classes", o.classes, "Synthetic equivalence classes");
  app.add_option("--zipf", o.zipf, "Zipf exponent of class popularity");
  app.add_option("--requests", o.requests, "Synthetic request count");
  app.add_option("--dimension", o.dimension, "Embedding dimension");
  app.add_option("--intra-mean", o.intra_mean, "Mean paraphrase-to-centroid cosine");
  app.add_option("--intra-spread", o.intra_spread, "Half-width of the cosine range");
  app.add_option("--paraphrases", o.paraphrases, "Paraphrases per class");
  app.add_option("--paraphrase-zipf", o.paraphrase_zipf, "Zipf exponent over paraphrases");

  auto* gen = app.add_subcommand("generate", "Write a synthetic JSONL trace");
  std::string gen_out;
  gen->add_option("--out", gen_out, "Output trace path")->required();

  auto* build = app.add_subcommand("build-static", "Split a trace and build the static tier");
  std::string trace_in, static_out, eval_out;
  build->add_option("trace", trace_in, "Input JSONL trace")->required();
  build->add_option("--static-out", static_out, "Static tier JSONL")->required();
  build->add_option("--eval-out", eval_out, "Evaluation stream JSONL")->required();

  auto* sim = app.add_subcommand("simulate", "Run a policy (or both) over an evaluation stream");
  std::string sim_static, sim_stream, sim_out, sim_manifest;
  sim->add_option("static", sim_static, "Static tier JSONL");
  sim->add_option("stream", sim_stream, "Evaluation stream JSONL");
  sim->add_option("--out-dir", sim_out, "Output directory")->required();
  sim->add_option("--manifest", sim_manifest, "Replay the run recorded in this manifest");

  auto* rep = app.add_subcommand("report", "Compare baseline and krites record files");
  std::vector<std::string> rep_files;
  std::string rep_out;
  rep->add_option("records", rep_files, "records.csv (both policies) or baseline.csv krites.csv")
      ->required()
      ->expected(1, 2);
  rep->add_option("--out", rep_out, "Also write the table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) return CmdGenerate(o, gen_out);
    if (*build) return CmdBuildStatic(o, trace_in, static_out, eval_out);
    if (*sim) return CmdSimulate(o, {sim_static, sim_stream, sim_out, sim_manifest});
    if (*rep) {
      std::vector<fs::path> files(rep_files.begin(), rep_files.end());
      return CmdReport(o, files, rep_out);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IngestError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
