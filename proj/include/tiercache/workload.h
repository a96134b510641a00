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
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tiercache/cache_tiers.h"
#include "tiercache/embedding.h"

namespace tiercache {

struct Request {
  // Position in the (shuffled) stream.
  std::uint64_t request_id = 0;
  // Id carried by the originating trace line.
  std::uint64_t source_id = 0;
  std::string prompt_text;
  ClassId class_id = 0;
  Embedding embedding;
};

// ---------------------------------------------------------------------------
// Trace files: JSON lines, one request per line,
//   {"id": 12, "text": "...", "class_id": 3, "embedding": [0.1, ...]}
// "text" is optional; "req:<id>" stands in when it is absent. Embeddings are
// normalized on ingest and must share one dimension.

std::vector<Request> LoadTrace(std::istream& in);
std::vector<Request> LoadTraceFile(const std::filesystem::path& path);

void WriteTrace(std::ostream& out, std::span<const Request> requests);
void WriteTraceFile(const std::filesystem::path& path, std::span<const Request> requests);

// ---------------------------------------------------------------------------
// History / evaluation split and static-tier selection

struct SplitConfig {
  double history_fraction = 0.2;
  std::uint64_t shuffle_seed = 0;
  double coverage = 0.6;

  void Validate() const;
};

struct Split {
  std::vector<Request> history;
  std::vector<Request> evaluation;
};

/// Seeded Fisher-Yates shuffle, then history = first floor(N * fraction)
/// requests. request_id is rewritten to the shuffled position.
/// Throws StructuralError on an empty input.
Split ShuffleAndSplit(std::vector<Request> requests, const SplitConfig& cfg);

struct ClassFrequency {
  ClassId class_id = 0;
  std::size_t count = 0;

  friend bool operator==(const ClassFrequency&, const ClassFrequency&) = default;
};

/// Most-frequent-first prefix of classes (ties: smaller class id) whose
/// cumulative count first reaches ceil(coverage * |history|).
std::vector<ClassFrequency> SelectHeadClasses(std::span<const Request> history, double coverage);

/// Shortest prompt of the class, by character count; ties go to the
/// lexicographically smaller text, then the smaller request id.
/// Throws StructuralError when the class has no member in `history`.
const Request& CanonicalRepresentative(std::span<const Request> history, ClassId class_id);

/// Synthetic curated answer for a class.
std::string StaticAnswerFor(ClassId class_id);

struct StaticBuild {
  std::vector<StaticEntrySpec> entries;
  std::vector<ClassFrequency> head_classes;
  std::size_t covered_requests = 0;
  double coverage_achieved = 0.0;
};

StaticBuild BuildStaticEntries(std::span<const Request> history, double coverage);

// Static-tier files: JSON lines
//   {"id": 0, "text": "...", "answer": "...", "class_id": 3, "embedding": [...]}
void WriteStaticEntries(std::ostream& out, std::span<const StaticEntrySpec> entries);
std::vector<StaticEntrySpec> LoadStaticEntries(std::istream& in);

// ---------------------------------------------------------------------------
// Synthetic workloads

struct SynthConfig {
  std::size_t num_classes = 100;
  double zipf_exponent = 1.0;
  std::size_t requests = 10000;
  std::size_t dimension = 64;
  // Cosine of each paraphrase to its class centroid is drawn uniformly from
  // [intra_mean - intra_spread, intra_mean + intra_spread], clipped to [-1, 1].
  double intra_mean = 0.9;
  double intra_spread = 0.0;
  std::size_t paraphrases_per_class = 8;
  double paraphrase_zipf_exponent = 0.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

/// Zipf class popularity, one random unit centroid per class, paraphrase
/// embeddings built in the centroid's tangent space. Each (class,
/// paraphrase) pair has a fixed text and embedding, so repeated paraphrases
/// are exact repeats. Deterministic per seed.
std::vector<Request> Synthesize(const SynthConfig& cfg);

/// Unit centroid used by Synthesize for `class_id`.
Embedding SyntheticCentroid(const SynthConfig& cfg, ClassId class_id);

/// Zipf weights w_k proportional to (k + 1)^-exponent, normalized.
std::vector<double> ZipfWeights(std::size_t n, double exponent);

}  // namespace tiercache
