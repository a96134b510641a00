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
#include <optional>
#include <unordered_map>
#include <vector>

#include "tiercache/embedding.h"
#include "tiercache/nearest_scan.h"

namespace tiercache {

/// Exact nearest-neighbor index over unit embeddings of a fixed dimension.
///
/// Rows live in one contiguous buffer; removal swaps the last row into the
/// freed slot, so row order is not insertion order. The result of Nearest
/// does not depend on row order: ties on similarity go to the smallest id.
///
/// Not internally synchronized. Callers serialize mutations against lookups.
class VectorIndex {
 public:
  explicit VectorIndex(std::size_t dimension);

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(EntryId id) const { return slot_.contains(id); }

  /// Throws StructuralError if `id` is already present or the dimension
  /// does not match.
  void Insert(EntryId id, const Embedding& e);

  /// Returns true iff `id` was present.
  bool Remove(EntryId id);

  /// Best match for `q`, nullopt iff the index is empty. Throws
  /// StructuralError on dimension mismatch.
  std::optional<Neighbor> Nearest(const Embedding& q) const;

  /// Same contract as Nearest, always through the serial reference scan.
  std::optional<Neighbor> NearestReferenceScan(const Embedding& q) const;

 private:
  void CheckDimension(const Embedding& e) const;
  ScanInput View() const { return ScanInput{rows_, ids_, dim_}; }

  std::size_t dim_;
  std::vector<double> rows_;
  std::vector<EntryId> ids_;
  std::unordered_map<EntryId, std::size_t> slot_;
};

}  // namespace tiercache
