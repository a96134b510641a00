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

#include "tiercache/embedding.h"

#include <cmath>
#include <string>

#include "tiercache/errors.h"

namespace tiercache {

namespace {

double Norm(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

}  // namespace

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw StructuralError("embedding must have at least one component");
  for (double x : values_) {
    if (!std::isfinite(x)) throw StructuralError("embedding has a non-finite component");
  }
  const double norm = Norm(values_);
  if (norm == 0.0) throw StructuralError("cannot normalize a zero embedding");
  for (double& x : values_) x /= norm;
}

Embedding Embedding::FromUnit(std::vector<double> values) {
  Embedding e;
  e.values_ = std::move(values);
  return e;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw StructuralError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
  const double denom = Norm(a) * Norm(b);
  if (denom == 0.0) throw StructuralError("cosine of a zero vector is undefined");
  return Dot(a, b) / denom;
}

double Similarity(const Embedding& a, const Embedding& b) {
  if (a.dimension() != b.dimension()) {
    throw StructuralError("dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                          std::to_string(b.dimension()));
  }
  return Dot(a.values(), b.values());
}

}  // namespace tiercache
