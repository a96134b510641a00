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
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "tiercache/embedding.h"
#include "tiercache/vector_index.h"

namespace tiercache {

using ClassId = std::int64_t;
// Logical time: the index of a request in the evaluation stream.
using Tick = std::uint64_t;

// ---------------------------------------------------------------------------
// Static tier

struct StaticEntry {
  EntryId entry_id = 0;
  std::string canonical_prompt;
  std::string answer;
  ClassId class_id = 0;
  Embedding embedding;
};

struct StaticEntrySpec {
  std::string prompt;
  std::string answer;
  ClassId class_id = 0;
  Embedding embedding;
};

struct StaticMatch {
  const StaticEntry* entry = nullptr;
  double similarity = 0.0;
};

/// Read-only tier of curated entries. There are no mutators: the tier is
/// fixed once Build returns. Entry ids are positions in the input list.
class StaticTier {
 public:
  /// Throws StructuralError on duplicate class ids or mixed dimensions.
  static StaticTier Build(std::size_t dimension, std::vector<StaticEntrySpec> specs);

  std::size_t dimension() const { return index_.dimension(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<StaticEntry>& entries() const { return entries_; }

  /// Throws StructuralError when `id` is not an entry of this tier.
  const StaticEntry& at(EntryId id) const;

  std::optional<StaticMatch> Lookup(const Embedding& q) const;

 private:
  explicit StaticTier(std::size_t dimension) : index_(dimension) {}

  std::vector<StaticEntry> entries_;
  VectorIndex index_;
};

// ---------------------------------------------------------------------------
// Dynamic tier

struct DynamicEntry {
  EntryId entry_id = 0;
  std::string prompt_key;
  std::string answer;
  ClassId answer_class_id = 0;
  Embedding embedding;
  bool static_origin = false;
  std::optional<EntryId> origin_static_id;
  Tick write_stamp = 0;
  Tick last_access = 0;

  friend bool operator==(const DynamicEntry&, const DynamicEntry&) = default;
};

/// Capacity is a live-entry count. `ttl`, when set, expires an entry once
/// now - write_stamp > ttl. A hit refreshes recency (last_access) but not
/// write_stamp, so TTL always measures age since the last write.
struct DynamicTierConfig {
  std::size_t capacity = 1;
  std::optional<Tick> ttl;

  void Validate() const;
};

struct DynamicMatch {
  const DynamicEntry* entry = nullptr;
  double similarity = 0.0;
};

enum class PromotionOutcome { kApplied, kSuperseded };

struct PromotionResult {
  PromotionOutcome outcome = PromotionOutcome::kApplied;
  // Entry written (applied) or the newer entry that blocked the write.
  EntryId entry_id = 0;
  bool created = false;
};

struct DynamicTierStats {
  std::uint64_t evictions = 0;
  std::uint64_t promoted_evictions = 0;
  std::uint64_t expirations = 0;
};

/// Mutable online tier: LRU-bounded, optionally TTL-bounded, with
/// write-back inserts and timestamp-guarded promotion upserts.
///
/// Eviction victim is the smallest (last_access, write_stamp, entry_id).
/// Promoted entries carry no special protection.
class DynamicTier {
 public:
  DynamicTier(std::size_t dimension, DynamicTierConfig config);

  std::size_t dimension() const { return index_.dimension(); }
  std::size_t size() const { return entries_.size(); }
  const DynamicTierConfig& config() const { return config_; }
  const DynamicTierStats& stats() const { return stats_; }

  /// Nearest live entry. Expired entries are purged first. Does not touch.
  std::optional<DynamicMatch> Lookup(const Embedding& q, Tick now);

  /// Sets last_access = now. Throws StructuralError if `id` is not live.
  void Touch(EntryId id, Tick now);

  /// Plain insert; never deduplicates on prompt_key. Evicts the LRU victim
  /// first when the tier is full.
  EntryId InsertWriteback(const std::string& prompt_key, const std::string& answer,
                          ClassId answer_class_id, const Embedding& e, Tick now);

  /// Writes `source.answer` under `prompt_key` with static-origin metadata.
  ///
  /// The target is the newest live entry with this prompt_key. If its
  /// write_stamp is later than `trigger_index` the call is superseded and
  /// nothing changes, unless that entry is already a promotion of the same
  /// static entry (re-applying it is the idempotent case). Overwrites keep
  /// the entry id and its last_access; a fresh entry gets last_access = now.
  PromotionResult UpsertPromotion(const std::string& prompt_key, const StaticEntry& source,
                                  const Embedding& e, Tick trigger_index, Tick now);

  const DynamicEntry* Find(EntryId id) const;

  /// Live entries ordered by entry_id.
  std::vector<DynamicEntry> Entries() const;

  /// JSON-lines snapshot, one entry per line, ordered by entry_id.
  void Dump(std::ostream& out) const;
  /// Rebuilds a tier from Dump output. Throws IngestError naming the line.
  static DynamicTier Load(std::istream& in, std::size_t dimension, DynamicTierConfig config);

  friend bool operator==(const DynamicTier& a, const DynamicTier& b) {
    return a.next_id_ == b.next_id_ && a.Entries() == b.Entries();
  }

 private:
  using LruKey = std::tuple<Tick, Tick, EntryId>;

  static LruKey LruKeyOf(const DynamicEntry& e) {
    return {e.last_access, e.write_stamp, e.entry_id};
  }

  void PurgeExpired(Tick now);
  void MakeRoom(Tick now);
  void Erase(EntryId id);
  void Emplace(DynamicEntry entry);

  DynamicTierConfig config_;
  VectorIndex index_;
  std::unordered_map<EntryId, DynamicEntry> entries_;
  std::set<LruKey> lru_;
  std::set<std::pair<Tick, EntryId>> by_write_;
  std::unordered_map<std::string, std::set<std::pair<Tick, EntryId>>> by_key_;
  EntryId next_id_ = 0;
  DynamicTierStats stats_;
};

}  // namespace tiercache
