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

#include "tiercache/vector_index.h"

#include <map>
#include <random>

#include <gtest/gtest.h>

#include "tiercache/errors.h"

namespace tiercache {
namespace {

// Independent brute force over a plain map; ties to the smaller id.
std::optional<Neighbor> BruteForce(const std::map<EntryId, Embedding>& store, const Embedding& q) {
  std::optional<Neighbor> best;
  for (const auto& [id, e] : store) {
    double dot = 0.0;
    for (std::size_t i = 0; i < e.dimension(); ++i) dot += e.values()[i] * q.values()[i];
    if (!best || dot > best->similarity) best = Neighbor{id, dot};
  }
  return best;
}

Embedding RandomUnit(std::mt19937_64& gen, std::size_t d) {
  std::normal_distribution<double> normal;
  std::vector<double> v(d);
  for (auto& x : v) x = normal(gen);
  return Embedding(std::move(v));
}

TEST(VectorIndexTest, SelfRetrieval) {
  VectorIndex index(2);
  Embedding e({0.6, 0.8});
  index.Insert(7, e);
  auto hit = index.Nearest(e);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->id, 7u);
  EXPECT_NEAR(hit->similarity, 1.0, 1e-15);
}

TEST(VectorIndexTest, EmptyAfterRemove) {
  VectorIndex index(2);
  EXPECT_FALSE(index.Nearest(Embedding({1.0, 0.0})).has_value());
  index.Insert(1, Embedding({1.0, 0.0}));
  EXPECT_TRUE(index.Remove(1));
  EXPECT_FALSE(index.Nearest(Embedding({1.0, 0.0})).has_value());
}

TEST(VectorIndexTest, TieGoesToSmallerId) {
  VectorIndex index(2);
  // Both at 45 degrees from the query.
  index.Insert(9, Embedding({1.0, 0.0}));
  index.Insert(4, Embedding({0.0, 1.0}));
  auto hit = index.Nearest(Embedding({1.0, 1.0}));
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->id, 4u);
}

TEST(VectorIndexTest, NearestOfTwoHandComputed) {
  VectorIndex index(2);
  index.Insert(1, Embedding({1.0, 0.0}));
  index.Insert(2, Embedding({0.0, 1.0}));
  auto hit = index.Nearest(Embedding({0.9, 0.1}));
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->id, 1u);
  // 0.9 / sqrt(0.82)
  EXPECT_NEAR(hit->similarity, 0.993883734673619, 1e-12);
}

TEST(VectorIndexTest, DuplicateIdAndDimensionErrors) {
  VectorIndex index(2);
  index.Insert(1, Embedding({1.0, 0.0}));
  EXPECT_THROW(index.Insert(1, Embedding({0.0, 1.0})), StructuralError);
  EXPECT_THROW(index.Insert(2, Embedding({1.0, 0.0, 0.0})), StructuralError);
  EXPECT_THROW(index.Nearest(Embedding({1.0, 0.0, 0.0})), StructuralError);
}

TEST(VectorIndexTest, RemoveSemantics) {
  VectorIndex index(2);
  EXPECT_FALSE(index.Remove(3));
  index.Insert(3, Embedding({1.0, 0.0}));
  EXPECT_TRUE(index.Remove(3));
  EXPECT_FALSE(index.Remove(3));
  index.Insert(3, Embedding({0.0, 1.0}));
  auto hit = index.Nearest(Embedding({0.0, 1.0}));
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->id, 3u);
}

TEST(VectorIndexTest, MatchesBruteForceUnderChurn) {
  std::mt19937_64 gen(42);
  for (std::size_t d : {4u, 32u}) {
    VectorIndex index(d);
    std::map<EntryId, Embedding> store;
    EntryId next = 0;
    for (int op = 0; op < 3000; ++op) {
      const auto r = gen() % 10;
      if (r < 6 || store.empty()) {
        Embedding e = RandomUnit(gen, d);
        index.Insert(next, e);
        store.emplace(next++, e);
      } else if (r < 8) {
        auto it = store.begin();
        std::advance(it, static_cast<long>(gen() % store.size()));
        EXPECT_TRUE(index.Remove(it->first));
        store.erase(it);
      } else {
        // Duplicate of a stored vector under a fresh id forces an exact tie.
        auto it = store.begin();
        std::advance(it, static_cast<long>(gen() % store.size()));
        index.Insert(next, it->second);
        store.emplace(next++, it->second);
      }
      const Embedding q = (op % 3 == 0 && !store.empty()) ? store.rbegin()->second : RandomUnit(gen, d);
      EXPECT_EQ(index.Nearest(q), BruteForce(store, q));
    }
  }
}

TEST(VectorIndexTest, UnrelatedQueriesSurviveInsertRemoveRoundTrip) {
  std::mt19937_64 gen(5);
  VectorIndex index(16);
  for (EntryId id = 0; id < 200; ++id) index.Insert(id, RandomUnit(gen, 16));
  std::vector<Embedding> queries;
  std::vector<std::optional<Neighbor>> before;
  for (int i = 0; i < 50; ++i) {
    queries.push_back(RandomUnit(gen, 16));
    before.push_back(index.Nearest(queries.back()));
  }
  index.Insert(1000, RandomUnit(gen, 16));
  index.Remove(1000);
  for (std::size_t i = 0; i < queries.size(); ++i) EXPECT_EQ(index.Nearest(queries[i]), before[i]);
}

TEST(NearestScanTest, ParallelMatchesReferenceBitForBit) {
  std::mt19937_64 gen(11);
  for (std::size_t n : {1u, 17u, 5000u, 10000u}) {
    const std::size_t d = 8;
    std::vector<double> rows;
    std::vector<EntryId> ids;
    for (std::size_t i = 0; i < n; ++i) {
      const Embedding e = (i % 5 == 4) ? Embedding(std::vector<double>(rows.begin(), rows.begin() + d))
                                       : RandomUnit(gen, d);
      rows.insert(rows.end(), e.values().begin(), e.values().end());
      ids.push_back(n - i);  // descending ids so ties are not resolved by position
    }
    const ScanInput in{rows, ids, d};
    for (int k = 0; k < 20; ++k) {
      const Embedding q = k == 0 ? Embedding(std::vector<double>(rows.begin(), rows.begin() + d))
                                 : RandomUnit(gen, d);
      EXPECT_EQ(NearestParallel(in, q.values(), 1), NearestReference(in, q.values()));
    }
  }
}

}  // namespace
}  // namespace tiercache
