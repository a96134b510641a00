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

#include "tiercache/nearest_scan.h"

#include <omp.h>

#include <vector>

#include "tiercache/embedding.h"

namespace tiercache {

std::optional<Neighbor> NearestReference(const ScanInput& in, std::span<const double> query) {
  std::optional<Neighbor> best;
  for (std::size_t row = 0; row < in.ids.size(); ++row) {
    const Neighbor cand{in.ids[row], Dot(in.rows.subspan(row * in.dim, in.dim), query)};
    if (!best || RanksBefore(cand, *best)) best = cand;
  }
  return best;
}

std::optional<Neighbor> NearestParallel(const ScanInput& in, std::span<const double> query,
                                        std::size_t parallel_threshold) {
  const std::size_t n = in.ids.size();
  if (n == 0) return std::nullopt;
  if (n < parallel_threshold) return NearestReference(in, query);

  const int threads = omp_get_max_threads();
  std::vector<std::optional<Neighbor>> partial(static_cast<std::size_t>(threads));

#pragma omp parallel num_threads(threads)
  {
    std::optional<Neighbor> local;
#pragma omp for schedule(static) nowait
    for (std::size_t row = 0; row < n; ++row) {
      const Neighbor cand{in.ids[row], Dot(in.rows.subspan(row * in.dim, in.dim), query)};
      if (!local || RanksBefore(cand, *local)) local = cand;
    }
    partial[static_cast<std::size_t>(omp_get_thread_num())] = local;
  }

  std::optional<Neighbor> best;
  for (const auto& p : partial) {
    if (p && (!best || RanksBefore(*p, *best))) best = p;
  }
  return best;
}

}  // namespace tiercache
