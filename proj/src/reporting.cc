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

#include "tiercache/reporting.h"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "tiercache/errors.h"

namespace tiercache {

namespace {

double Ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string FormatDouble(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string CsvEscape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Reads one CSV record; quoted fields may span lines. Returns false at end
// of input. `line_no` tracks the last physical line consumed.
bool ReadCsvRecord(std::istream& in, std::size_t& line_no, std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  ++line_no;
  const std::size_t first_line = line_no;
  std::string cur;
  bool quoted = false;
  for (;;) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cur += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(cur));
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    if (!quoted) break;
    if (!std::getline(in, line)) throw IngestError(first_line, "unterminated quoted field");
    ++line_no;
    cur += '\n';
  }
  fields.push_back(std::move(cur));
  return true;
}

constexpr const char* kRecordHeader =
    "policy,request_id,origin,s_static,s_dynamic,grey_zone,error,verify_outcome,judge_calls,"
    "approvals,rejections,served_entry_id,answer_class_id,request_class_id,promotions_applied,"
    "promotions_superseded,answer";
constexpr std::size_t kRecordColumns = 17;

}  // namespace

SummaryReport Summarize(std::span<const ServeRecord> records, const ReportOptions& options) {
  if (records.empty()) throw StructuralError("cannot summarize an empty record list");
  SummaryReport r;
  r.requests = records.size();
  r.epsilon = options.epsilon;

  // Entry id -> index into promotion_reuse of its current promoted lifetime.
  std::unordered_map<EntryId, std::size_t> lifetime;

  for (const ServeRecord& rec : records) {
    for (EntryId id : rec.promotions_applied) {
      lifetime[id] = r.promotion_reuse.size();
      r.promotion_reuse.push_back(0);
    }
    r.promotions_applied += rec.promotions_applied.size();
    r.promotions_superseded += rec.promotions_superseded;

    switch (rec.origin) {
      case RecordOrigin::kStaticDirect: ++r.static_direct; break;
      case RecordOrigin::kDynamicPromoted: {
        ++r.dynamic_promoted;
        if (rec.error) ++r.promoted_errors;
        auto it = rec.served_entry_id ? lifetime.find(*rec.served_entry_id) : lifetime.end();
        if (it != lifetime.end()) ++r.promotion_reuse[it->second];
        break;
      }
      case RecordOrigin::kDynamicGenerated: ++r.dynamic_generated; break;
      case RecordOrigin::kBackend: ++r.backend; break;
    }
    if (rec.error) ++r.errors;
    if (rec.grey_zone) ++r.grey_zone;
    if (rec.verify_outcome) {
      switch (*rec.verify_outcome) {
        case EnqueueOutcome::kQueued: ++r.verify_queued; break;
        case EnqueueOutcome::kDeduplicated: ++r.verify_deduplicated; break;
        case EnqueueOutcome::kThrottled: ++r.verify_throttled; break;
        case EnqueueOutcome::kDroppedFull: ++r.verify_dropped_full; break;
      }
    }
  }

  const ServeRecord& last = records.back();
  r.judge_calls = last.judge_calls_so_far;
  r.approvals = last.approvals_so_far;
  r.rejections = last.rejections_so_far;

  const std::uint64_t n = r.requests;
  r.hit_rate = Ratio(n - r.backend, n);
  r.static_origin_fraction = Ratio(r.static_direct + r.dynamic_promoted, n);
  r.error_rate = Ratio(r.errors, n);
  r.p_grey = Ratio(r.grey_zone, n);
  r.p_app = Ratio(r.approvals, r.judge_calls);

  std::uint64_t reuse_total = 0;
  for (std::uint64_t x : r.promotion_reuse) {
    reuse_total += x;
    r.reuse_max = std::max(r.reuse_max, x);
  }
  r.reuse_mean = Ratio(reuse_total, r.promotion_reuse.size());
  r.static_serves_per_judge_call = Ratio(reuse_total, r.judge_calls);

  r.p_prom = Ratio(r.dynamic_promoted, n);
  r.promoted_error_fraction = Ratio(r.promoted_errors, n);
  r.epsilon_bound = r.epsilon * r.p_prom;
  if (options.judge_cost) r.judge_cost_total = static_cast<double>(r.judge_calls) * *options.judge_cost;
  return r;
}

CurveSeries Curve(std::span<const ServeRecord> records, std::uint64_t bucket, std::string policy) {
  if (bucket < 1) throw StructuralError("curve bucket must be >= 1");
  CurveSeries series{std::move(policy), {}};
  std::uint64_t static_origin = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RecordOrigin o = records[i].origin;
    if (o == RecordOrigin::kStaticDirect || o == RecordOrigin::kDynamicPromoted) ++static_origin;
    const std::uint64_t x = i + 1;
    if (x % bucket == 0 || x == records.size()) {
      series.points.push_back({x, Ratio(static_origin, x)});
    }
  }
  return series;
}

ComparisonReport Compare(const SummaryReport& baseline, const SummaryReport& krites) {
  ComparisonReport c;
  c.baseline_fraction = baseline.static_origin_fraction;
  c.krites_fraction = krites.static_origin_fraction;
  c.absolute_gain = c.krites_fraction - c.baseline_fraction;
  if (c.baseline_fraction > 0.0) c.relative_gain = c.absolute_gain / c.baseline_fraction;
  c.baseline_hit_rate = baseline.hit_rate;
  c.krites_hit_rate = krites.hit_rate;
  c.hit_rate_delta = krites.hit_rate - baseline.hit_rate;
  c.hit_rate_changed = c.hit_rate_delta != 0.0;
  c.hit_rate_regressed = c.hit_rate_delta < 0.0;
  c.baseline_error_rate = baseline.error_rate;
  c.krites_error_rate = krites.error_rate;
  return c;
}

std::string FormatRelativeGain(std::optional<double> gain) {
  if (!gain) return "undefined";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%+.1f%%", *gain * 100.0);
  return buf;
}

std::string FormatComparisonTable(const ComparisonReport& c) {
  char buf[256];
  std::ostringstream out;
  std::snprintf(buf, sizeof buf, "%-28s %10s %10s %14s\n", "metric", "baseline", "krites",
                "relative gain");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-28s %9.1f%% %9.1f%% %14s\n", "static-origin served",
                c.baseline_fraction * 100.0, c.krites_fraction * 100.0,
                FormatRelativeGain(c.relative_gain).c_str());
  out << buf;
  std::snprintf(buf, sizeof buf, "%-28s %9.1f%% %9.1f%% %+13.1fpp\n", "overall hit rate",
                c.baseline_hit_rate * 100.0, c.krites_hit_rate * 100.0, c.hit_rate_delta * 100.0);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-28s %9.2f%% %9.2f%%\n", "error rate",
                c.baseline_error_rate * 100.0, c.krites_error_rate * 100.0);
  out << buf;
  if (c.hit_rate_changed) {
    out << "note: overall hit rate differs between policies ("
        << (c.hit_rate_regressed ? "krites lower" : "promotions created new hits") << ")\n";
  }
  return out.str();
}

nlohmann::ordered_json ToJson(const SummaryReport& r) {
  nlohmann::ordered_json j;
  j["requests"] = r.requests;
  j["origins"] = {{"static_direct", r.static_direct},
                  {"dynamic_promoted", r.dynamic_promoted},
                  {"dynamic_generated", r.dynamic_generated},
                  {"backend", r.backend}};
  j["hit_rate"] = r.hit_rate;
  j["static_origin_fraction"] = r.static_origin_fraction;
  j["errors"] = r.errors;
  j["error_rate"] = r.error_rate;
  j["grey_zone_requests"] = r.grey_zone;
  j["p_grey"] = r.p_grey;
  j["verification"] = {{"queued", r.verify_queued},
                       {"deduplicated", r.verify_deduplicated},
                       {"throttled", r.verify_throttled},
                       {"dropped_full", r.verify_dropped_full}};
  j["judge_calls"] = r.judge_calls;
  j["approvals"] = r.approvals;
  j["rejections"] = r.rejections;
  j["p_app"] = r.p_app;
  j["promotions_applied"] = r.promotions_applied;
  j["promotions_superseded"] = r.promotions_superseded;

  std::map<std::uint64_t, std::uint64_t> histogram;
  for (std::uint64_t x : r.promotion_reuse) ++histogram[x];
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [k, v] : histogram) hist[std::to_string(k)] = v;
  j["promotion_reuse"] = {{"count", r.promotion_reuse.size()},
                          {"mean", r.reuse_mean},
                          {"max", r.reuse_max},
                          {"histogram", hist}};
  j["static_serves_per_judge_call"] = r.static_serves_per_judge_call;
  j["p_prom"] = r.p_prom;
  j["epsilon_bound_check"] = {{"epsilon", r.epsilon},
                              {"promoted_errors", r.promoted_errors},
                              {"observed_promoted_error_fraction", r.promoted_error_fraction},
                              {"epsilon_times_p_prom", r.epsilon_bound}};
  j["judge_cost_total"] = r.judge_cost_total ? nlohmann::ordered_json(*r.judge_cost_total)
                                             : nlohmann::ordered_json(nullptr);
  return j;
}

nlohmann::ordered_json ToJson(const ComparisonReport& c) {
  nlohmann::ordered_json j;
  j["baseline_static_origin_fraction"] = c.baseline_fraction;
  j["krites_static_origin_fraction"] = c.krites_fraction;
  j["absolute_gain"] = c.absolute_gain;
  j["relative_gain"] = c.relative_gain ? nlohmann::ordered_json(*c.relative_gain)
                                       : nlohmann::ordered_json(nullptr);
  j["relative_gain_text"] = FormatRelativeGain(c.relative_gain);
  j["baseline_hit_rate"] = c.baseline_hit_rate;
  j["krites_hit_rate"] = c.krites_hit_rate;
  j["hit_rate_delta"] = c.hit_rate_delta;
  j["hit_rate_changed"] = c.hit_rate_changed;
  j["hit_rate_regressed"] = c.hit_rate_regressed;
  j["baseline_error_rate"] = c.baseline_error_rate;
  j["krites_error_rate"] = c.krites_error_rate;
  return j;
}

void WriteRecordsCsv(std::ostream& out,
                     const std::vector<std::pair<std::string, std::span<const ServeRecord>>>& runs) {
  out << kRecordHeader << '\n';
  for (const auto& [policy, records] : runs) {
    for (const ServeRecord& r : records) {
      std::string promoted;
      for (std::size_t i = 0; i < r.promotions_applied.size(); ++i) {
        if (i > 0) promoted += ';';
        promoted += std::to_string(r.promotions_applied[i]);
      }
      out << CsvEscape(policy) << ',' << r.request_id << ',' << ToString(r.origin) << ','
          << (r.s_static ? FormatDouble(*r.s_static) : "") << ','
          << (r.s_dynamic ? FormatDouble(*r.s_dynamic) : "") << ',' << (r.grey_zone ? 1 : 0)
          << ',' << (r.error ? 1 : 0) << ','
          << (r.verify_outcome ? ToString(*r.verify_outcome) : "") << ','
          << r.judge_calls_so_far << ',' << r.approvals_so_far << ',' << r.rejections_so_far
          << ',' << (r.served_entry_id ? std::to_string(*r.served_entry_id) : "") << ','
          << r.answer_class_id << ',' << r.request_class_id << ',' << promoted << ','
          << r.promotions_superseded << ',' << CsvEscape(r.answer) << '\n';
    }
  }
}

std::map<std::string, std::vector<ServeRecord>> ReadRecordsCsv(std::istream& in) {
  std::map<std::string, std::vector<ServeRecord>> out;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw IngestError(1, "records file is empty");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordHeader) throw IngestError(line_no, "unexpected records header");

  auto u64 = [&](const std::string& s) -> std::uint64_t {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw IngestError(line_no, "bad integer '" + s + "'");
    return v;
  };
  auto i64 = [&](const std::string& s) -> std::int64_t {
    std::size_t pos = 0;
    const auto v = std::stoll(s, &pos);
    if (pos != s.size()) throw IngestError(line_no, "bad integer '" + s + "'");
    return v;
  };
  auto opt_double = [&](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw IngestError(line_no, "bad number '" + s + "'");
    return v;
  };

  std::vector<std::string> f;
  while (ReadCsvRecord(in, line_no, f)) {
    if (f.size() == 1 && f[0].find_first_not_of(" \t") == std::string::npos) continue;
    if (f.size() != kRecordColumns) {
      throw IngestError(line_no, "expected " + std::to_string(kRecordColumns) + " columns, got " +
                                     std::to_string(f.size()));
    }
    try {
      ServeRecord r;
      r.request_id = u64(f[1]);
      r.origin = ParseRecordOrigin(f[2]);
      r.s_static = opt_double(f[3]);
      r.s_dynamic = opt_double(f[4]);
      r.grey_zone = f[5] == "1";
      r.error = f[6] == "1";
      if (!f[7].empty()) r.verify_outcome = ParseEnqueueOutcome(f[7]);
      r.judge_calls_so_far = u64(f[8]);
      r.approvals_so_far = u64(f[9]);
      r.rejections_so_far = u64(f[10]);
      if (!f[11].empty()) r.served_entry_id = u64(f[11]);
      r.answer_class_id = i64(f[12]);
      r.request_class_id = i64(f[13]);
      if (!f[14].empty()) {
        std::stringstream ids(f[14]);
        std::string id;
        while (std::getline(ids, id, ';')) r.promotions_applied.push_back(u64(id));
      }
      r.promotions_superseded = static_cast<std::uint32_t>(u64(f[15]));
      r.answer = f[16];
      out[f[0]].push_back(std::move(r));
    } catch (const IngestError&) {
      throw;
    } catch (const std::exception& e) {
      throw IngestError(line_no, e.what());
    }
  }
  return out;
}

void WriteCurvesCsv(std::ostream& out, std::span<const CurveSeries> series) {
  out << "policy,x,y\n";
  for (const CurveSeries& s : series) {
    for (const CurvePoint& p : s.points) {
      out << CsvEscape(s.policy) << ',' << p.x << ',' << FormatDouble(p.y) << '\n';
    }
  }
}

}  // namespace tiercache
