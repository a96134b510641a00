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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tiercache/simulator.h"

namespace tiercache {

struct ReportOptions {
  // Judge false-approve rate used for the promoted-error bound.
  double epsilon = 0.0;
  // Cost per judge call; reported as judge_calls * judge_cost when set.
  std::optional<double> judge_cost;
};

struct SummaryReport {
  std::uint64_t requests = 0;
  std::uint64_t static_direct = 0;
  std::uint64_t dynamic_promoted = 0;
  std::uint64_t dynamic_generated = 0;
  std::uint64_t backend = 0;

  double hit_rate = 0.0;
  double static_origin_fraction = 0.0;

  std::uint64_t errors = 0;
  std::uint64_t promoted_errors = 0;
  double error_rate = 0.0;

  std::uint64_t grey_zone = 0;
  double p_grey = 0.0;

  std::uint64_t verify_queued = 0;
  std::uint64_t verify_deduplicated = 0;
  std::uint64_t verify_throttled = 0;
  std::uint64_t verify_dropped_full = 0;

  std::uint64_t judge_calls = 0;
  std::uint64_t approvals = 0;
  std::uint64_t rejections = 0;
  double p_app = 0.0;

  std::uint64_t promotions_applied = 0;
  std::uint64_t promotions_superseded = 0;
  // N per applied promotion: promoted hits before eviction or re-promotion.
  std::vector<std::uint64_t> promotion_reuse;
  double reuse_mean = 0.0;
  std::uint64_t reuse_max = 0;
  // Promoted hits per judge call: approval rate times mean reuse.
  double static_serves_per_judge_call = 0.0;

  double p_prom = 0.0;
  double epsilon = 0.0;
  double promoted_error_fraction = 0.0;
  double epsilon_bound = 0.0;

  std::optional<double> judge_cost_total;
};

/// One pass over `records`. Throws StructuralError on an empty list.
SummaryReport Summarize(std::span<const ServeRecord> records, const ReportOptions& options = {});

struct CurvePoint {
  std::uint64_t x = 0;
  double y = 0.0;
};

struct CurveSeries {
  std::string policy;
  std::vector<CurvePoint> points;
};

/// Cumulative static-origin fraction after every `bucket` requests, plus a
/// final point at the stream length when it is not a multiple of `bucket`.
CurveSeries Curve(std::span<const ServeRecord> records, std::uint64_t bucket,
                  std::string policy = "");

struct ComparisonReport {
  double baseline_fraction = 0.0;
  double krites_fraction = 0.0;
  double absolute_gain = 0.0;
  // Unset when the baseline fraction is zero.
  std::optional<double> relative_gain;
  double baseline_hit_rate = 0.0;
  double krites_hit_rate = 0.0;
  double hit_rate_delta = 0.0;
  // Flag, not an error: promotions can turn misses into hits.
  bool hit_rate_changed = false;
  bool hit_rate_regressed = false;
  double baseline_error_rate = 0.0;
  double krites_error_rate = 0.0;
};

ComparisonReport Compare(const SummaryReport& baseline, const SummaryReport& krites);

/// Relative gain as a signed percentage with one decimal, e.g. "+136.6%";
/// "undefined" when absent.
std::string FormatRelativeGain(std::optional<double> gain);

/// Three-column table: metric, baseline, krites, relative gain.
std::string FormatComparisonTable(const ComparisonReport& c);

nlohmann::ordered_json ToJson(const SummaryReport& r);
nlohmann::ordered_json ToJson(const ComparisonReport& c);

// records.csv: header plus one row per record, prefixed by the policy name.
void WriteRecordsCsv(std::ostream& out, const std::vector<std::pair<std::string,
                     std::span<const ServeRecord>>>& runs);
/// Rows grouped by policy, in file order. Throws IngestError naming the line.
std::map<std::string, std::vector<ServeRecord>> ReadRecordsCsv(std::istream& in);

void WriteCurvesCsv(std::ostream& out, std::span<const CurveSeries> series);

}  // namespace tiercache
