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

#include <algorithm>
#include <string>

#include "tiercache/errors.h"

namespace tiercache {

VectorIndex::VectorIndex(std::size_t dimension) : dim_(dimension) {
  if (dim_ == 0) throw StructuralError("index dimension must be positive");
}

void VectorIndex::CheckDimension(const Embedding& e) const {
  if (e.dimension() != dim_) {
    throw StructuralError("dimension mismatch: index is " + std::to_string(dim_) +
                          ", embedding is " + std::to_string(e.dimension()));
  }
}

void VectorIndex::Insert(EntryId id, const Embedding& e) {
  CheckDimension(e);
  if (slot_.contains(id)) throw StructuralError("duplicate entry id " + std::to_string(id));
  slot_.emplace(id, ids_.size());
  ids_.push_back(id);
  rows_.insert(rows_.end(), e.values().begin(), e.values().end());
}

bool VectorIndex::Remove(EntryId id) {
  auto it = slot_.find(id);
  if (it == slot_.end()) return false;
  const std::size_t hole = it->second;
  const std::size_t last = ids_.size() - 1;
  slot_.erase(it);
  if (hole != last) {
    std::copy_n(rows_.begin() + static_cast<std::ptrdiff_t>(last * dim_), dim_,
                rows_.begin() + static_cast<std::ptrdiff_t>(hole * dim_));
    ids_[hole] = ids_[last];
    slot_[ids_[hole]] = hole;
  }
  ids_.pop_back();
  rows_.resize(ids_.size() * dim_);
  return true;
}

std::optional<Neighbor> VectorIndex::Nearest(const Embedding& q) const {
  CheckDimension(q);
  return NearestParallel(View(), q.values());
}

std::optional<Neighbor> VectorIndex::NearestReferenceScan(const Embedding& q) const {
  CheckDimension(q);
  return NearestReference(View(), q.values());
}

}  // namespace tiercache
