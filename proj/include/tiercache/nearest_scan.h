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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace tiercache {

using EntryId = std::uint64_t;

struct Neighbor {
  EntryId id = 0;
  double similarity = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// True when `a` ranks ahead of `b`: higher similarity, then smaller id.
inline bool RanksBefore(const Neighbor& a, const Neighbor& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.id < b.id;
}

// Flat row-major store of `ids.size()` unit vectors of width `dim`.
struct ScanInput {
  std::span<const double> rows;
  std::span<const EntryId> ids;
  std::size_t dim = 0;
};

/// Serial reference scan. Returns the best-ranked row for `query`, or
/// nullopt when the store is empty.
std::optional<Neighbor> NearestReference(const ScanInput& in, std::span<const double> query);

/// OpenMP scan over rows. Each dot product is evaluated exactly as in the
/// reference, and the argmax reduction uses the same total order, so the
/// result is bit-identical to NearestReference for any thread count.
/// Stores smaller than `parallel_threshold` rows are scanned serially.
std::optional<Neighbor> NearestParallel(const ScanInput& in, std::span<const double> query,
                                        std::size_t parallel_threshold = 4096);

}  // namespace tiercache
