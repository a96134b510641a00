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
#include <span>
#include <vector>

namespace tiercache {

/// Unit-normalized embedding vector. Construction normalizes the input, so
/// every live Embedding has L2 norm within 1e-6 of 1.0 and similarity between
/// two embeddings reduces to a dot product.
class Embedding {
 public:
  Embedding() = default;

  /// Normalizes `values`. Throws StructuralError on an empty or zero vector
  /// or on non-finite components.
  explicit Embedding(std::vector<double> values);

  /// Wraps values that are already unit length without renormalizing.
  /// Used when reloading vectors written by this library.
  static Embedding FromUnit(std::vector<double> values);

  std::size_t dimension() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  bool empty() const { return values_.empty(); }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<double> values_;
};

/// Dot product of equal-length spans; serial, left-to-right summation.
double Dot(std::span<const double> a, std::span<const double> b);

/// Cosine similarity of two raw vectors: dot(a,b) / (|a| |b|).
/// Throws StructuralError on dimension mismatch or a zero vector.
double Cosine(std::span<const double> a, std::span<const double> b);

/// Similarity of two embeddings. Both are unit length, so this is their dot
/// product. Throws StructuralError on dimension mismatch.
double Similarity(const Embedding& a, const Embedding& b);

}  // namespace tiercache
