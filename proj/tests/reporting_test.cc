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

#include <sstream>

#include <gtest/gtest.h>

#include "tiercache/errors.h"

namespace tiercache {
namespace {

ServeRecord Rec(std::uint64_t id, RecordOrigin o) {
  ServeRecord r;
  r.request_id = id;
  r.origin = o;
  r.request_class_id = 1;
  r.answer_class_id = 1;
  r.answer = o == RecordOrigin::kBackend ? "backend-answer:" + std::to_string(id) : "static-answer:1";
  return r;
}

TEST(SummarizeTest, EmptyIsAnError) {
  EXPECT_THROW(Summarize(std::vector<ServeRecord>{}), StructuralError);
}

TEST(SummarizeTest, AllBackend) {
  std::vector<ServeRecord> rs;
  for (int i = 0; i < 5; ++i) rs.push_back(Rec(i, RecordOrigin::kBackend));
  const SummaryReport s = Summarize(rs);
  EXPECT_EQ(s.hit_rate, 0.0);
  EXPECT_EQ(s.static_origin_fraction, 0.0);
  EXPECT_EQ(s.backend, 5u);
  for (const auto& p : Curve(rs, 2).points) EXPECT_EQ(p.y, 0.0);
}

TEST(SummarizeTest, StaticOriginFractionArithmetic) {
  std::vector<ServeRecord> rs;
  for (int i = 0; i < 10; ++i) rs.push_back(Rec(i, RecordOrigin::kBackend));
  rs[1].origin = RecordOrigin::kStaticDirect;
  rs[4].origin = RecordOrigin::kStaticDirect;
  rs[7].origin = RecordOrigin::kDynamicPromoted;
  rs[8].origin = RecordOrigin::kDynamicGenerated;
  const SummaryReport s = Summarize(rs);
  EXPECT_DOUBLE_EQ(s.static_origin_fraction, 3.0 / 10.0);
  EXPECT_DOUBLE_EQ(s.hit_rate, 4.0 / 10.0);
  EXPECT_EQ(s.static_direct + s.dynamic_promoted + s.dynamic_generated + s.backend, s.requests);
}

TEST(SummarizeTest, VerificationAndReuseCounters) {
  std::vector<ServeRecord> rs;
  for (int i = 0; i < 8; ++i) rs.push_back(Rec(i, RecordOrigin::kBackend));
  rs[0].grey_zone = true;
  rs[0].verify_outcome = EnqueueOutcome::kQueued;
  rs[1].grey_zone = true;
  rs[1].verify_outcome = EnqueueOutcome::kDeduplicated;
  rs[2].grey_zone = true;
  rs[2].verify_outcome = EnqueueOutcome::kThrottled;
  // Entry 5 promoted before request 2, hit twice, then promoted again.
  rs[2].promotions_applied = {5};
  rs[3].origin = RecordOrigin::kDynamicPromoted;
  rs[3].served_entry_id = 5;
  rs[4].origin = RecordOrigin::kDynamicPromoted;
  rs[4].served_entry_id = 5;
  rs[4].error = true;
  rs[4].answer_class_id = 2;
  rs[5].promotions_applied = {5, 6};
  rs[6].origin = RecordOrigin::kDynamicPromoted;
  rs[6].served_entry_id = 6;
  rs[7].promotions_superseded = 1;
  rs[7].judge_calls_so_far = 4;
  rs[7].approvals_so_far = 3;
  rs[7].rejections_so_far = 1;

  ReportOptions opts;
  opts.epsilon = 0.2;
  opts.judge_cost = 0.5;
  const SummaryReport s = Summarize(rs, opts);
  EXPECT_EQ(s.grey_zone, 3u);
  EXPECT_DOUBLE_EQ(s.p_grey, 3.0 / 8.0);
  EXPECT_EQ(s.verify_queued, 1u);
  EXPECT_EQ(s.verify_deduplicated, 1u);
  EXPECT_EQ(s.verify_throttled, 1u);
  EXPECT_EQ(s.judge_calls, 4u);
  EXPECT_DOUBLE_EQ(s.p_app, 0.75);
  EXPECT_EQ(s.promotions_applied, 3u);
  EXPECT_EQ(s.promotions_superseded, 1u);
  EXPECT_EQ(s.promotion_reuse, (std::vector<std::uint64_t>{2, 0, 1}));
  EXPECT_DOUBLE_EQ(s.reuse_mean, 1.0);
  EXPECT_EQ(s.reuse_max, 2u);
  EXPECT_DOUBLE_EQ(s.static_serves_per_judge_call, 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(s.p_prom, 3.0 / 8.0);
  EXPECT_EQ(s.promoted_errors, 1u);
  EXPECT_DOUBLE_EQ(s.promoted_error_fraction, 1.0 / 8.0);
  EXPECT_DOUBLE_EQ(s.epsilon_bound, 0.2 * 3.0 / 8.0);
  EXPECT_DOUBLE_EQ(*s.judge_cost_total, 2.0);
}

TEST(CurveTest, Sampling) {
  std::vector<ServeRecord> rs;
  for (int i = 0; i < 7; ++i) rs.push_back(Rec(i, i % 2 ? RecordOrigin::kStaticDirect : RecordOrigin::kBackend));
  const CurveSeries c = Curve(rs, 3, "krites");
  ASSERT_EQ(c.points.size(), 3u);
  EXPECT_EQ(c.points[0].x, 3u);
  EXPECT_DOUBLE_EQ(c.points[0].y, 1.0 / 3.0);
  EXPECT_EQ(c.points[2].x, 7u);
  EXPECT_DOUBLE_EQ(c.points[2].y, 3.0 / 7.0);

  const CurveSeries whole = Curve(rs, rs.size());
  ASSERT_EQ(whole.points.size(), 1u);
  EXPECT_DOUBLE_EQ(whole.points[0].y, Summarize(rs).static_origin_fraction);
  EXPECT_THROW(Curve(rs, 0), StructuralError);
}

TEST(CurveTest, LatePromotionsDivergeUpward) {
  // First half identical, second half krites serves promoted entries where
  // the baseline served write-backs.
  std::vector<ServeRecord> base, krites;
  for (int i = 0; i < 100; ++i) {
    const bool late = i >= 50 && i % 2 == 0;
    base.push_back(Rec(i, late ? RecordOrigin::kDynamicGenerated : RecordOrigin::kBackend));
    krites.push_back(Rec(i, late ? RecordOrigin::kDynamicPromoted : RecordOrigin::kBackend));
  }
  const auto b = Curve(base, 10).points;
  const auto k = Curve(krites, 10).points;
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(b[i].y, k[i].y);
  for (std::size_t i = 5; i < b.size(); ++i) EXPECT_GT(k[i].y, b[i].y);
}

SummaryReport Fractions(double static_origin, double hit_rate) {
  SummaryReport s;
  s.static_origin_fraction = static_origin;
  s.hit_rate = hit_rate;
  return s;
}

TEST(CompareTest, IdenticalReportsHaveZeroGain) {
  const ComparisonReport c = Compare(Fractions(0.3, 0.5), Fractions(0.3, 0.5));
  ASSERT_TRUE(c.relative_gain);
  EXPECT_EQ(*c.relative_gain, 0.0);
  EXPECT_FALSE(c.hit_rate_changed);
  EXPECT_EQ(FormatRelativeGain(c.relative_gain), "+0.0%");
}

TEST(CompareTest, ZeroBaselineIsUndefined) {
  const ComparisonReport c = Compare(Fractions(0.0, 0.5), Fractions(0.1, 0.6));
  EXPECT_FALSE(c.relative_gain);
  EXPECT_DOUBLE_EQ(c.absolute_gain, 0.1);
  EXPECT_EQ(FormatRelativeGain(c.relative_gain), "undefined");
  EXPECT_TRUE(c.hit_rate_changed);
  EXPECT_FALSE(c.hit_rate_regressed);
  EXPECT_EQ(ToJson(c).at("relative_gain"), nullptr);
}

TEST(CompareTest, RegressionFlagged) {
  const ComparisonReport c = Compare(Fractions(0.1, 0.5), Fractions(0.2, 0.4));
  EXPECT_TRUE(c.hit_rate_regressed);
}

// A gain quoted to one decimal is computed from unrounded fractions, so it
// can only be checked against the interval that one-decimal fractions allow.
struct GainInterval {
  double lo, hi;
};
GainInterval FromRounded(double base_pct, double krites_pct) {
  const double h = 0.05;
  return {(krites_pct - h - (base_pct + h)) / (base_pct + h),
          (krites_pct + h - (base_pct - h)) / (base_pct - h)};
}

TEST(CompareTest, QuotedGainsConsistentWithRoundedFractions) {
  const GainInterval conversational = FromRounded(8.2, 19.4);
  EXPECT_LE(conversational.lo, 1.365);
  EXPECT_GE(conversational.hi, 1.365);
  const GainInterval search_style = FromRounded(2.2, 8.6);
  EXPECT_LE(search_style.lo, 2.903);
  EXPECT_GE(search_style.hi, 2.903);

  // From the rounded values themselves the formula gives one decimal more.
  EXPECT_EQ(FormatRelativeGain(Compare(Fractions(0.082, 0), Fractions(0.194, 0)).relative_gain),
            "+136.6%");
  EXPECT_EQ(FormatRelativeGain(Compare(Fractions(0.022, 0), Fractions(0.086, 0)).relative_gain),
            "+290.9%");
}

TEST(ReportJsonTest, StableKeys) {
  std::vector<ServeRecord> rs{Rec(0, RecordOrigin::kStaticDirect), Rec(1, RecordOrigin::kBackend)};
  const auto j = ToJson(Summarize(rs));
  for (const char* ptr : {"/requests", "/origins/static_direct", "/origins/dynamic_promoted",
                          "/origins/dynamic_generated", "/origins/backend", "/hit_rate",
                          "/static_origin_fraction", "/error_rate", "/p_grey", "/verification/queued",
                          "/judge_calls", "/approvals", "/rejections", "/p_app",
                          "/promotion_reuse/histogram", "/p_prom",
                          "/epsilon_bound_check/epsilon_times_p_prom"}) {
    EXPECT_TRUE(j.contains(nlohmann::ordered_json::json_pointer(ptr))) << ptr;
  }
  EXPECT_DOUBLE_EQ(j.at("static_origin_fraction").get<double>(), 0.5);
}

TEST(RecordsCsvTest, RoundTrip) {
  std::vector<ServeRecord> rs;
  for (int i = 0; i < 4; ++i) rs.push_back(Rec(i, RecordOrigin::kBackend));
  rs[0].s_static = 0.1 + 0.2;
  rs[0].grey_zone = true;
  rs[0].verify_outcome = EnqueueOutcome::kQueued;
  rs[1].origin = RecordOrigin::kDynamicPromoted;
  rs[1].s_static = -0.123456789012345678;
  rs[1].s_dynamic = 1.0;
  rs[1].served_entry_id = 42;
  rs[1].promotions_applied = {3, 42};
  rs[1].promotions_superseded = 2;
  rs[1].judge_calls_so_far = 7;
  rs[1].approvals_so_far = 5;
  rs[1].rejections_so_far = 2;
  rs[2].answer = "comma, \"quotes\" and\nnewline";
  rs[2].error = true;
  rs[2].answer_class_id = -3;

  std::stringstream buf;
  WriteRecordsCsv(buf, {{"baseline", rs}, {"krites", std::span<const ServeRecord>(rs).first(2)}});
  const auto back = ReadRecordsCsv(buf);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.at("baseline"), rs);
  EXPECT_EQ(back.at("krites").size(), 2u);

  std::stringstream bad("policy,request_id\nbaseline,not-a-number\n");
  EXPECT_THROW(ReadRecordsCsv(bad), IngestError);
}

TEST(CurvesCsvTest, Format) {
  std::vector<CurveSeries> series{{"baseline", {{1, 0.0}, {2, 0.5}}}};
  std::stringstream buf;
  WriteCurvesCsv(buf, series);
  EXPECT_EQ(buf.str(), "policy,x,y\nbaseline,1,0\nbaseline,2,0.5\n");
}

TEST(ComparisonTableTest, MentionsGain) {
  const std::string t = FormatComparisonTable(Compare(Fractions(0.082, 0.3), Fractions(0.194, 0.3)));
  EXPECT_NE(t.find("+136.6%"), std::string::npos) << t;
}

}  // namespace
}  // namespace tiercache
