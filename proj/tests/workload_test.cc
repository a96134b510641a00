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

#include "tiercache/workload.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "tiercache/errors.h"

namespace tiercache {
namespace {

Request Req(std::uint64_t id, ClassId cls, std::string text = "") {
  if (text.empty()) text = "prompt " + std::to_string(id);
  return Request{id, id, std::move(text), cls, Embedding({1.0, static_cast<double>(id % 7)})};
}

std::vector<Request> Freqs(std::initializer_list<std::pair<ClassId, int>> counts) {
  std::vector<Request> out;
  for (auto [cls, n] : counts) {
    for (int i = 0; i < n; ++i) out.push_back(Req(out.size(), cls));
  }
  return out;
}

TEST(TraceTest, EmptyInput) {
  std::istringstream in("");
  EXPECT_TRUE(LoadTrace(in).empty());
}

TEST(TraceTest, OneLine) {
  std::istringstream in(R"({"id": 12, "text": "hello", "class_id": 3, "embedding": [3, 4]})");
  const auto rs = LoadTrace(in);
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].source_id, 12u);
  EXPECT_EQ(rs[0].request_id, 0u);
  EXPECT_EQ(rs[0].prompt_text, "hello");
  EXPECT_EQ(rs[0].class_id, 3);
  EXPECT_DOUBLE_EQ(rs[0].embedding.values()[0], 0.6);
  EXPECT_DOUBLE_EQ(rs[0].embedding.values()[1], 0.8);
}

TEST(TraceTest, MissingTextGetsSyntheticKey) {
  std::istringstream in(R"({"id": 5, "class_id": 1, "embedding": [1, 0]})");
  EXPECT_EQ(LoadTrace(in)[0].prompt_text, "req:5");
}

void ExpectIngestErrorAt(const std::string& body, std::size_t line) {
  std::istringstream in(body);
  try {
    LoadTrace(in);
    FAIL() << "no error for: " << body;
  } catch (const IngestError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
  }
}

TEST(TraceTest, ErrorsNameTheLine) {
  const std::string good = R"({"id": 0, "class_id": 1, "embedding": [1, 0, 0, 0]})";
  ExpectIngestErrorAt(good + "\n" + R"({"id": 1, "class_id": 1, "embedding": [1, 0, 0]})", 2);
  ExpectIngestErrorAt(good + "\n\n" + R"({"id": 2, "embedding": [1, 0, 0, 0]})", 3);
  ExpectIngestErrorAt("{not json", 1);
  ExpectIngestErrorAt(R"({"id": 0, "class_id": 1, "embedding": [0, 0]})", 1);
  ExpectIngestErrorAt(R"({"id": 0, "class_id": 1, "embedding": ["a"]})", 1);
  ExpectIngestErrorAt("[1, 2]", 1);
}

TEST(TraceTest, RoundTrip) {
  SynthConfig cfg;
  cfg.num_classes = 5;
  cfg.requests = 50;
  cfg.dimension = 8;
  const auto rs = Synthesize(cfg);
  std::stringstream buf;
  WriteTrace(buf, rs);
  const auto back = LoadTrace(buf);
  ASSERT_EQ(back.size(), rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    EXPECT_EQ(back[i].prompt_text, rs[i].prompt_text);
    EXPECT_EQ(back[i].class_id, rs[i].class_id);
    // Ingest re-normalizes, which may move the last bit.
    for (std::size_t k = 0; k < cfg.dimension; ++k) {
      EXPECT_NEAR(back[i].embedding.values()[k], rs[i].embedding.values()[k], 1e-15);
    }
  }
}

TEST(SplitTest, Arithmetic) {
  std::vector<Request> rs;
  for (int i = 0; i < 10; ++i) rs.push_back(Req(i, i % 3));
  const Split s = ShuffleAndSplit(rs, {0.2, 1, 0.6});
  EXPECT_EQ(s.history.size(), 2u);
  EXPECT_EQ(s.evaluation.size(), 8u);
  for (std::size_t i = 0; i < s.history.size(); ++i) EXPECT_EQ(s.history[i].request_id, i);
  for (std::size_t i = 0; i < s.evaluation.size(); ++i) EXPECT_EQ(s.evaluation[i].request_id, i + 2);
  EXPECT_THROW(ShuffleAndSplit({}, {}), StructuralError);
  EXPECT_THROW(ShuffleAndSplit(rs, {1.0, 1, 0.6}), ValidationError);
  EXPECT_THROW(ShuffleAndSplit(rs, {0.2, 1, 0.0}), ValidationError);
}

std::vector<std::uint64_t> Order(const Split& s) {
  std::vector<std::uint64_t> ids;
  for (const auto& r : s.history) ids.push_back(r.source_id);
  for (const auto& r : s.evaluation) ids.push_back(r.source_id);
  return ids;
}

TEST(SplitTest, SeededPermutation) {
  std::vector<Request> rs;
  for (int i = 0; i < 100; ++i) rs.push_back(Req(i, i % 4));
  const auto base = Order(ShuffleAndSplit(rs, {0.2, 0, 0.6}));
  EXPECT_EQ(Order(ShuffleAndSplit(rs, {0.2, 0, 0.6})), base);

  std::set<std::vector<std::uint64_t>> seen{base};
  for (std::uint64_t seed = 1; seed < 20; ++seed) {
    auto order = Order(ShuffleAndSplit(rs, {0.2, seed, 0.6}));
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::uint64_t i = 0; i < 100; ++i) ASSERT_EQ(sorted[i], i);
    seen.insert(std::move(order));
  }
  EXPECT_EQ(seen.size(), 20u);
}

TEST(HeadClassesTest, Walkthroughs) {
  EXPECT_EQ(SelectHeadClasses(Freqs({{4, 3}}), 0.6), (std::vector<ClassFrequency>{{4, 3}}));
  EXPECT_EQ(SelectHeadClasses(Freqs({{2, 3}, {1, 6}, {3, 1}}), 0.6),
            (std::vector<ClassFrequency>{{1, 6}}));
  EXPECT_EQ(SelectHeadClasses(Freqs({{8, 5}, {5, 5}}), 0.6),
            (std::vector<ClassFrequency>{{5, 5}, {8, 5}}));
  EXPECT_EQ(SelectHeadClasses(Freqs({{1, 1}, {2, 1}, {3, 1}}), 1.0).size(), 3u);
}

TEST(HeadClassesTest, GreedyPrefixIsMinimal) {
  SynthConfig cfg;
  cfg.num_classes = 40;
  cfg.requests = 997;
  cfg.dimension = 4;
  const auto rs = Synthesize(cfg);
  for (double coverage : {0.05, 0.3, 0.6, 0.9, 1.0}) {
    const auto head = SelectHeadClasses(rs, coverage);
    ASSERT_FALSE(head.empty());
    std::size_t total = 0;
    for (const auto& h : head) total += h.count;
    const double target = coverage * static_cast<double>(rs.size());
    EXPECT_GE(static_cast<double>(total), target - 1e-9);
    EXPECT_LT(static_cast<double>(total - head.back().count), target);
    for (std::size_t i = 1; i < head.size(); ++i) {
      EXPECT_TRUE(head[i - 1].count > head[i].count ||
                  (head[i - 1].count == head[i].count && head[i - 1].class_id < head[i].class_id));
    }
  }
}

TEST(CanonicalTest, Cases) {
  std::vector<Request> h{Req(0, 1, "only")};
  EXPECT_EQ(CanonicalRepresentative(h, 1).request_id, 0u);
  h = {Req(0, 1, "hi there"), Req(1, 1, "hi"), Req(2, 2, "x")};
  EXPECT_EQ(CanonicalRepresentative(h, 1).prompt_text, "hi");
  h = {Req(0, 1, "ab"), Req(1, 1, "aa"), Req(2, 1, "aa")};
  EXPECT_EQ(CanonicalRepresentative(h, 1).request_id, 1u);
  // Length is counted in characters, not bytes.
  h = {Req(0, 1, "\xC3\xA9\xC3\xA9"), Req(1, 1, "abc")};
  EXPECT_EQ(CanonicalRepresentative(h, 1).request_id, 0u);
  EXPECT_THROW(CanonicalRepresentative(h, 9), StructuralError);
}

TEST(StaticBuildTest, NoEvaluationLeakage) {
  SynthConfig cfg;
  cfg.num_classes = 30;
  cfg.requests = 2000;
  cfg.dimension = 16;
  cfg.seed = 4;
  const Split s = ShuffleAndSplit(Synthesize(cfg), {0.2, 9, 0.6});
  const StaticBuild b = BuildStaticEntries(s.history, 0.6);
  ASSERT_EQ(b.entries.size(), b.head_classes.size());
  EXPECT_GE(b.coverage_achieved, 0.6);
  for (std::size_t i = 0; i < b.entries.size(); ++i) {
    const auto& e = b.entries[i];
    const Request& rep = CanonicalRepresentative(s.history, e.class_id);
    EXPECT_LT(rep.request_id, s.history.size());
    EXPECT_EQ(e.prompt, rep.prompt_text);
    EXPECT_EQ(e.answer, StaticAnswerFor(e.class_id));
    EXPECT_EQ(e.embedding, rep.embedding);
  }
  std::stringstream buf;
  WriteStaticEntries(buf, b.entries);
  const auto back = LoadStaticEntries(buf);
  ASSERT_EQ(back.size(), b.entries.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].prompt, b.entries[i].prompt);
    EXPECT_EQ(back[i].class_id, b.entries[i].class_id);
    EXPECT_NEAR(Similarity(back[i].embedding, b.entries[i].embedding), 1.0, 1e-14);
  }
}

TEST(SynthTest, DegenerateGeometry) {
  SynthConfig cfg;
  cfg.num_classes = 5;
  cfg.requests = 200;
  cfg.dimension = 8;
  cfg.intra_mean = 1.0;
  for (const auto& r : Synthesize(cfg)) {
    EXPECT_NEAR(Similarity(r.embedding, SyntheticCentroid(cfg, r.class_id)), 1.0, 1e-12);
  }
}

TEST(SynthTest, FixedCosineToCentroid) {
  SynthConfig cfg;
  cfg.num_classes = 20;
  cfg.requests = 2000;
  cfg.dimension = 64;
  cfg.intra_mean = 0.9;
  for (const auto& r : Synthesize(cfg)) {
    ASSERT_NEAR(Similarity(r.embedding, SyntheticCentroid(cfg, r.class_id)), 0.9, 1e-9);
  }
}

TEST(SynthTest, SpreadStaysInBand) {
  SynthConfig cfg;
  cfg.requests = 3000;
  cfg.dimension = 32;
  cfg.intra_mean = 0.85;
  cfg.intra_spread = 0.05;
  double lo = 1.0, hi = -1.0;
  for (const auto& r : Synthesize(cfg)) {
    const double c = Similarity(r.embedding, SyntheticCentroid(cfg, r.class_id));
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  EXPECT_GE(lo, 0.8 - 1e-9);
  EXPECT_LE(hi, 0.9 + 1e-9);
  EXPECT_LT(lo, 0.81);
  EXPECT_GT(hi, 0.89);
}

TEST(SynthTest, CrossClassSimilarityWellBelowIntra) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SynthConfig cfg;
    cfg.num_classes = 2;
    cfg.zipf_exponent = 0.0;
    cfg.requests = 400;
    cfg.dimension = 64;
    cfg.intra_mean = 0.95;
    cfg.seed = seed;
    const Embedding c0 = SyntheticCentroid(cfg, 0);
    const Embedding c1 = SyntheticCentroid(cfg, 1);
    ASSERT_LT(std::abs(Similarity(c0, c1)), 0.5);
    const auto rs = Synthesize(cfg);
    double cross = -1.0;
    for (const auto& a : rs) {
      for (const auto& b : rs) {
        if (a.class_id != b.class_id) cross = std::max(cross, Similarity(a.embedding, b.embedding));
      }
    }
    EXPECT_LT(cross, 0.8) << "seed " << seed;
  }
}

TEST(SynthTest, DeterministicAndTextsVary) {
  SynthConfig cfg;
  cfg.num_classes = 10;
  cfg.requests = 500;
  cfg.dimension = 8;
  cfg.seed = 77;
  const auto a = Synthesize(cfg);
  const auto b = Synthesize(cfg);
  ASSERT_EQ(a.size(), b.size());
  std::map<ClassId, std::set<std::size_t>> lengths;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].prompt_text, b[i].prompt_text);
    EXPECT_EQ(a[i].embedding, b[i].embedding);
    EXPECT_EQ(a[i].class_id, b[i].class_id);
    lengths[a[i].class_id].insert(a[i].prompt_text.size());
  }
  std::size_t varied = 0;
  for (const auto& [cls, ls] : lengths) varied += ls.size() > 1;
  EXPECT_GT(varied, 0u);
}

TEST(SynthTest, ZipfFrequenciesChiSquare) {
  SynthConfig cfg;
  cfg.num_classes = 100;
  cfg.requests = 100000;
  cfg.dimension = 2;
  cfg.paraphrases_per_class = 1;
  cfg.seed = 2026;
  const auto rs = Synthesize(cfg);
  std::vector<double> observed(cfg.num_classes, 0.0);
  for (const auto& r : rs) observed[static_cast<std::size_t>(r.class_id)] += 1.0;
  const auto w = ZipfWeights(cfg.num_classes, cfg.zipf_exponent);
  double chi2 = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double expected = w[k] * static_cast<double>(cfg.requests);
    chi2 += (observed[k] - expected) * (observed[k] - expected) / expected;
  }
  // 99 degrees of freedom; the 0.999 quantile is about 148.2.
  EXPECT_LT(chi2, 148.2);
}

TEST(SynthTest, ZipfWeightsShape) {
  const auto w = ZipfWeights(4, 1.0);
  const double h = 1.0 + 0.5 + 1.0 / 3.0 + 0.25;
  EXPECT_NEAR(w[0], 1.0 / h, 1e-15);
  EXPECT_NEAR(w[3], 0.25 / h, 1e-15);
  for (double x : ZipfWeights(5, 0.0)) EXPECT_DOUBLE_EQ(x, 0.2);
}

TEST(SynthTest, InvalidConfigs) {
  SynthConfig cfg;
  cfg.dimension = 1;
  EXPECT_THROW(Synthesize(cfg), StructuralError);
  cfg = {};
  cfg.intra_mean = 0.0;
  EXPECT_THROW(Synthesize(cfg), ValidationError);
  cfg = {};
  cfg.num_classes = 0;
  EXPECT_THROW(Synthesize(cfg), ValidationError);
}

}  // namespace
}  // namespace tiercache
