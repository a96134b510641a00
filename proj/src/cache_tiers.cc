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

#include "tiercache/cache_tiers.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_set>

#include <json.hpp>

#include "tiercache/errors.h"

namespace tiercache {

using json = nlohmann::json;

StaticTier StaticTier::Build(std::size_t dimension, std::vector<StaticEntrySpec> specs) {
  StaticTier tier(dimension);
  std::unordered_set<ClassId> seen;
  tier.entries_.reserve(specs.size());
  for (auto& spec : specs) {
    if (!seen.insert(spec.class_id).second) {
      throw StructuralError("duplicate class_id " + std::to_string(spec.class_id) +
                            " in static tier");
    }
    const EntryId id = tier.entries_.size();
    tier.index_.Insert(id, spec.embedding);
    tier.entries_.push_back(StaticEntry{id, std::move(spec.prompt), std::move(spec.answer),
                                        spec.class_id, std::move(spec.embedding)});
  }
  return tier;
}

const StaticEntry& StaticTier::at(EntryId id) const {
  if (id >= entries_.size()) throw StructuralError("no static entry " + std::to_string(id));
  return entries_[id];
}

std::optional<StaticMatch> StaticTier::Lookup(const Embedding& q) const {
  auto hit = index_.Nearest(q);
  if (!hit) return std::nullopt;
  return StaticMatch{&entries_[hit->id], hit->similarity};
}

void DynamicTierConfig::Validate() const {
  if (capacity < 1) throw ValidationError("dynamic tier capacity must be >= 1");
  if (ttl && *ttl < 1) throw ValidationError("dynamic tier ttl must be >= 1 when set");
}

DynamicTier::DynamicTier(std::size_t dimension, DynamicTierConfig config)
    : config_(config), index_(dimension) {
  config_.Validate();
}

void DynamicTier::Emplace(DynamicEntry entry) {
  index_.Insert(entry.entry_id, entry.embedding);
  lru_.insert(LruKeyOf(entry));
  by_write_.emplace(entry.write_stamp, entry.entry_id);
  by_key_[entry.prompt_key].emplace(entry.write_stamp, entry.entry_id);
  const EntryId id = entry.entry_id;
  entries_.emplace(id, std::move(entry));
}

void DynamicTier::Erase(EntryId id) {
  auto it = entries_.find(id);
  const DynamicEntry& e = it->second;
  index_.Remove(id);
  lru_.erase(LruKeyOf(e));
  by_write_.erase({e.write_stamp, id});
  auto key_it = by_key_.find(e.prompt_key);
  key_it->second.erase({e.write_stamp, id});
  if (key_it->second.empty()) by_key_.erase(key_it);
  entries_.erase(it);
}

void DynamicTier::PurgeExpired(Tick now) {
  if (!config_.ttl) return;
  const Tick ttl = *config_.ttl;
  while (!by_write_.empty()) {
    const auto [stamp, id] = *by_write_.begin();
    if (now <= stamp || now - stamp <= ttl) break;
    Erase(id);
    ++stats_.expirations;
  }
}

void DynamicTier::MakeRoom(Tick now) {
  PurgeExpired(now);
  while (entries_.size() >= config_.capacity) {
    const EntryId victim = std::get<2>(*lru_.begin());
    if (entries_.at(victim).static_origin) ++stats_.promoted_evictions;
    Erase(victim);
    ++stats_.evictions;
  }
}

std::optional<DynamicMatch> DynamicTier::Lookup(const Embedding& q, Tick now) {
  PurgeExpired(now);
  auto hit = index_.Nearest(q);
  if (!hit) return std::nullopt;
  return DynamicMatch{&entries_.at(hit->id), hit->similarity};
}

void DynamicTier::Touch(EntryId id, Tick now) {
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw StructuralError("touch of absent dynamic entry " + std::to_string(id));
  }
  DynamicEntry& e = it->second;
  lru_.erase(LruKeyOf(e));
  e.last_access = now;
  lru_.insert(LruKeyOf(e));
}

EntryId DynamicTier::InsertWriteback(const std::string& prompt_key, const std::string& answer,
                                     ClassId answer_class_id, const Embedding& e, Tick now) {
  if (e.dimension() != dimension()) {
    throw StructuralError("dimension mismatch on dynamic insert");
  }
  MakeRoom(now);
  const EntryId id = next_id_++;
  Emplace(DynamicEntry{id, prompt_key, answer, answer_class_id, e, false, std::nullopt, now, now});
  return id;
}

PromotionResult DynamicTier::UpsertPromotion(const std::string& prompt_key,
                                             const StaticEntry& source, const Embedding& e,
                                             Tick trigger_index, Tick now) {
  if (e.dimension() != dimension()) {
    throw StructuralError("dimension mismatch on promotion");
  }
  PurgeExpired(now);

  auto key_it = by_key_.find(prompt_key);
  if (key_it != by_key_.end()) {
    const EntryId target = key_it->second.rbegin()->second;
    DynamicEntry current = entries_.at(target);
    const bool same_pointer = current.static_origin && current.origin_static_id == source.entry_id;
    if (current.write_stamp > trigger_index && !same_pointer) {
      return {PromotionOutcome::kSuperseded, target, false};
    }
    Erase(target);
    current.answer = source.answer;
    current.answer_class_id = source.class_id;
    current.embedding = e;
    current.static_origin = true;
    current.origin_static_id = source.entry_id;
    current.write_stamp = now;
    Emplace(std::move(current));
    return {PromotionOutcome::kApplied, target, false};
  }

  MakeRoom(now);
  const EntryId id = next_id_++;
  Emplace(DynamicEntry{id, prompt_key, source.answer, source.class_id, e, true, source.entry_id,
                       now, now});
  return {PromotionOutcome::kApplied, id, true};
}

const DynamicEntry* DynamicTier::Find(EntryId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<DynamicEntry> DynamicTier::Entries() const {
  std::map<EntryId, const DynamicEntry*> ordered;
  for (const auto& [id, e] : entries_) ordered.emplace(id, &e);
  std::vector<DynamicEntry> out;
  out.reserve(ordered.size());
  for (const auto& [id, e] : ordered) out.push_back(*e);
  return out;
}

void DynamicTier::Dump(std::ostream& out) const {
  for (const DynamicEntry& e : Entries()) {
    json line = {
        {"entry_id", e.entry_id},
        {"prompt_key", e.prompt_key},
        {"answer", e.answer},
        {"answer_class_id", e.answer_class_id},
        {"embedding", std::vector<double>(e.embedding.values().begin(), e.embedding.values().end())},
        {"static_origin", e.static_origin},
        {"origin_static_id", e.origin_static_id ? json(*e.origin_static_id) : json(nullptr)},
        {"write_stamp", e.write_stamp},
        {"last_access", e.last_access},
    };
    out << line.dump() << '\n';
  }
}

DynamicTier DynamicTier::Load(std::istream& in, std::size_t dimension, DynamicTierConfig config) {
  DynamicTier tier(dimension, config);
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(text);
      DynamicEntry e;
      e.entry_id = j.at("entry_id").get<EntryId>();
      e.prompt_key = j.at("prompt_key").get<std::string>();
      e.answer = j.at("answer").get<std::string>();
      e.answer_class_id = j.at("answer_class_id").get<ClassId>();
      auto values = j.at("embedding").get<std::vector<double>>();
      if (values.size() != dimension) {
        throw IngestError(line_no, "embedding has dimension " + std::to_string(values.size()) +
                                       ", expected " + std::to_string(dimension));
      }
      e.embedding = Embedding::FromUnit(std::move(values));
      e.static_origin = j.at("static_origin").get<bool>();
      if (!j.at("origin_static_id").is_null()) {
        e.origin_static_id = j.at("origin_static_id").get<EntryId>();
      }
      e.write_stamp = j.at("write_stamp").get<Tick>();
      e.last_access = j.at("last_access").get<Tick>();
      if (tier.entries_.contains(e.entry_id)) {
        throw IngestError(line_no, "duplicate entry_id " + std::to_string(e.entry_id));
      }
      tier.next_id_ = std::max(tier.next_id_, e.entry_id + 1);
      tier.Emplace(std::move(e));
    } catch (const json::exception& ex) {
      throw IngestError(line_no, ex.what());
    }
  }
  if (tier.size() > tier.config_.capacity) {
    throw IngestError(line_no, "snapshot holds more entries than the configured capacity");
  }
  return tier;
}

}  // namespace tiercache
