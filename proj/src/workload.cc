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

#include "tiercache/workload.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "tiercache/errors.h"
#include "tiercache/hashing.h"

namespace tiercache {

using json = nlohmann::json;

namespace {

std::size_t CharacterCount(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool Blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::vector<double> ToVector(const Embedding& e) {
  return {e.values().begin(), e.values().end()};
}

Embedding ReadEmbedding(const json& j, std::size_t line_no, std::size_t& dim) {
  const json& arr = j.at("embedding");
  if (!arr.is_array()) throw IngestError(line_no, "embedding must be an array");
  std::vector<double> values;
  values.reserve(arr.size());
  for (const json& v : arr) {
    if (!v.is_number()) throw IngestError(line_no, "embedding components must be numbers");
    values.push_back(v.get<double>());
  }
  if (dim == 0) {
    dim = values.size();
  } else if (values.size() != dim) {
    throw IngestError(line_no, "embedding has dimension " + std::to_string(values.size()) +
                                   ", expected " + std::to_string(dim));
  }
  try {
    return Embedding(std::move(values));
  } catch (const StructuralError& e) {
    throw IngestError(line_no, e.what());
  }
}

template <typename T>
T Required(const json& j, const char* field, std::size_t line_no) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) {
    throw IngestError(line_no, std::string("missing field \"") + field + "\"");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw IngestError(line_no, std::string("field \"") + field + "\" has the wrong type");
  }
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::vector<Request> LoadTrace(std::istream& in) {
  std::vector<Request> out;
  std::size_t dim = 0;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (Blank(text)) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw IngestError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw IngestError(line_no, "expected a JSON object");
    Request r;
    r.source_id = Required<std::uint64_t>(j, "id", line_no);
    r.request_id = out.size();
    r.class_id = Required<ClassId>(j, "class_id", line_no);
    auto t = j.find("text");
    r.prompt_text = (t != j.end() && t->is_string()) ? t->get<std::string>()
                                                     : "req:" + std::to_string(r.source_id);
    r.embedding = ReadEmbedding(j, line_no, dim);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Request> LoadTraceFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace " + path.string());
  try {
    return LoadTrace(in);
  } catch (const IngestError& e) {
    throw IngestError(e.line(), path.string() + ": " + e.what());
  }
}

void WriteTrace(std::ostream& out, std::span<const Request> requests) {
  for (const Request& r : requests) {
    json j = {{"id", r.request_id},
              {"source_id", r.source_id},
              {"text", r.prompt_text},
              {"class_id", r.class_id},
              {"embedding", ToVector(r.embedding)}};
    out << j.dump() << '\n';
  }
}

void WriteTraceFile(const std::filesystem::path& path, std::span<const Request> requests) {
  auto out = OpenForWrite(path);
  WriteTrace(out, requests);
  if (!out) throw IoError("write failed for " + path.string());
}

void SplitConfig::Validate() const {
  if (!(history_fraction > 0.0 && history_fraction < 1.0)) {
    throw ValidationError("history_fraction must lie in (0, 1)");
  }
  if (!(coverage > 0.0 && coverage <= 1.0)) throw ValidationError("coverage must lie in (0, 1]");
}

Split ShuffleAndSplit(std::vector<Request> requests, const SplitConfig& cfg) {
  cfg.Validate();
  if (requests.empty()) throw StructuralError("cannot split an empty request list");
  Rng rng(cfg.shuffle_seed);
  for (std::size_t i = requests.size() - 1; i > 0; --i) {
    const std::size_t j = rng.Below(i + 1);
    std::swap(requests[i], requests[j]);
  }
  for (std::size_t i = 0; i < requests.size(); ++i) requests[i].request_id = i;

  const auto cut = static_cast<std::size_t>(
      std::floor(static_cast<double>(requests.size()) * cfg.history_fraction));
  Split split;
  split.history.assign(std::make_move_iterator(requests.begin()),
                       std::make_move_iterator(requests.begin() + static_cast<std::ptrdiff_t>(cut)));
  split.evaluation.assign(std::make_move_iterator(requests.begin() + static_cast<std::ptrdiff_t>(cut)),
                          std::make_move_iterator(requests.end()));
  return split;
}

std::vector<ClassFrequency> SelectHeadClasses(std::span<const Request> history, double coverage) {
  if (history.empty()) throw StructuralError("head selection needs a non-empty history");
  std::map<ClassId, std::size_t> counts;
  for (const Request& r : history) ++counts[r.class_id];
  std::vector<ClassFrequency> ranked;
  ranked.reserve(counts.size());
  for (const auto& [cls, n] : counts) ranked.push_back({cls, n});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ClassFrequency& a, const ClassFrequency& b) { return a.count > b.count; });

  // 1e-9 keeps e.g. 0.6 * 10 from rounding up to 7.
  const auto target = static_cast<std::size_t>(
      std::ceil(coverage * static_cast<double>(history.size()) - 1e-9));
  std::vector<ClassFrequency> head;
  std::size_t covered = 0;
  for (const ClassFrequency& c : ranked) {
    if (covered >= target) break;
    head.push_back(c);
    covered += c.count;
  }
  return head;
}

const Request& CanonicalRepresentative(std::span<const Request> history, ClassId class_id) {
  const Request* best = nullptr;
  std::size_t best_len = 0;
  for (const Request& r : history) {
    if (r.class_id != class_id) continue;
    const std::size_t len = CharacterCount(r.prompt_text);
    if (best == nullptr || len < best_len ||
        (len == best_len && (r.prompt_text < best->prompt_text ||
                             (r.prompt_text == best->prompt_text && r.request_id < best->request_id)))) {
      best = &r;
      best_len = len;
    }
  }
  if (best == nullptr) {
    throw StructuralError("class " + std::to_string(class_id) + " is absent from the history");
  }
  return *best;
}

std::string StaticAnswerFor(ClassId class_id) { return "static-answer:" + std::to_string(class_id); }

StaticBuild BuildStaticEntries(std::span<const Request> history, double coverage) {
  StaticBuild build;
  build.head_classes = SelectHeadClasses(history, coverage);
  for (const ClassFrequency& c : build.head_classes) {
    const Request& rep = CanonicalRepresentative(history, c.class_id);
    build.entries.push_back({rep.prompt_text, StaticAnswerFor(c.class_id), c.class_id, rep.embedding});
    build.covered_requests += c.count;
  }
  build.coverage_achieved =
      static_cast<double>(build.covered_requests) / static_cast<double>(history.size());
  return build;
}

void WriteStaticEntries(std::ostream& out, std::span<const StaticEntrySpec> entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const StaticEntrySpec& e = entries[i];
    json j = {{"id", i},
              {"text", e.prompt},
              {"answer", e.answer},
              {"class_id", e.class_id},
              {"embedding", ToVector(e.embedding)}};
    out << j.dump() << '\n';
  }
}

std::vector<StaticEntrySpec> LoadStaticEntries(std::istream& in) {
  std::vector<StaticEntrySpec> out;
  std::size_t dim = 0;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (Blank(text)) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw IngestError(line_no, std::string("malformed JSON: ") + e.what());
    }
    StaticEntrySpec spec;
    spec.prompt = Required<std::string>(j, "text", line_no);
    spec.answer = Required<std::string>(j, "answer", line_no);
    spec.class_id = Required<ClassId>(j, "class_id", line_no);
    spec.embedding = ReadEmbedding(j, line_no, dim);
    out.push_back(std::move(spec));
  }
  return out;
}

void SynthConfig::Validate() const {
  if (dimension < 2) throw StructuralError("synthetic embeddings need dimension >= 2");
  if (num_classes < 1) throw ValidationError("num_classes must be >= 1");
  if (requests < 1) throw ValidationError("requests must be >= 1");
  if (paraphrases_per_class < 1) throw ValidationError("paraphrases_per_class must be >= 1");
  if (!(zipf_exponent >= 0.0) || !(paraphrase_zipf_exponent >= 0.0)) {
    throw ValidationError("zipf exponents must be >= 0");
  }
  if (!(intra_mean > 0.0 && intra_mean <= 1.0)) throw ValidationError("intra_mean must lie in (0, 1]");
  if (!(intra_spread >= 0.0)) throw ValidationError("intra_spread must be >= 0");
}

std::vector<double> ZipfWeights(std::size_t n, double exponent) {
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = std::pow(static_cast<double>(k + 1), -exponent);
    total += w[k];
  }
  for (double& x : w) x /= total;
  return w;
}

namespace {

constexpr std::uint64_t kCentroidSalt = 0x63656e74726f6964ULL;

std::vector<double> GaussianVector(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.Normal();
  return v;
}

std::size_t SampleCdf(const std::vector<double>& cdf, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<double> Cdf(const std::vector<double>& weights) {
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) cdf[i] = (acc += weights[i]);
  return cdf;
}

struct Paraphrase {
  std::string text;
  Embedding embedding;
};

Paraphrase MakeParaphrase(const SynthConfig& cfg, const Embedding& centroid, ClassId cls,
                          std::size_t para) {
  Rng rng(Mix(cfg.seed, static_cast<std::uint64_t>(cls), para));
  double cosine = cfg.intra_mean + cfg.intra_spread * (2.0 * rng.Uniform() - 1.0);
  cosine = std::clamp(cosine, -1.0, 1.0);

  const auto mu = centroid.values();
  std::vector<double> tangent = GaussianVector(rng, cfg.dimension);
  const double along = Dot(tangent, mu);
  for (std::size_t i = 0; i < tangent.size(); ++i) tangent[i] -= along * mu[i];
  const double tnorm = std::sqrt(Dot(tangent, tangent));
  const double sine = std::sqrt(std::max(0.0, 1.0 - cosine * cosine));

  std::vector<double> v(cfg.dimension);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = cosine * mu[i] + (tnorm > 0.0 ? sine * tangent[i] / tnorm : 0.0);
  }

  const std::size_t filler = rng.Below(12);
  std::string text = "class " + std::to_string(cls) + " variant " + std::to_string(para);
  if (filler > 0) text += " " + std::string(filler, '~');
  return {std::move(text), Embedding(std::move(v))};
}

}  // namespace

Embedding SyntheticCentroid(const SynthConfig& cfg, ClassId class_id) {
  Rng rng(Mix(cfg.seed, kCentroidSalt, static_cast<std::uint64_t>(class_id)));
  for (;;) {
    std::vector<double> g = GaussianVector(rng, cfg.dimension);
    if (Dot(g, g) > 0.0) return Embedding(std::move(g));
  }
}

std::vector<Request> Synthesize(const SynthConfig& cfg) {
  cfg.Validate();
  const auto class_cdf = Cdf(ZipfWeights(cfg.num_classes, cfg.zipf_exponent));
  const auto para_cdf = Cdf(ZipfWeights(cfg.paraphrases_per_class, cfg.paraphrase_zipf_exponent));

  std::unordered_map<ClassId, Embedding> centroids;
  std::map<std::pair<ClassId, std::size_t>, Paraphrase> paraphrases;

  Rng rng(cfg.seed);
  std::vector<Request> out;
  out.reserve(cfg.requests);
  for (std::size_t i = 0; i < cfg.requests; ++i) {
    const auto cls = static_cast<ClassId>(SampleCdf(class_cdf, rng.Uniform()));
    const std::size_t para = SampleCdf(para_cdf, rng.Uniform());
    auto c_it = centroids.find(cls);
    if (c_it == centroids.end()) c_it = centroids.emplace(cls, SyntheticCentroid(cfg, cls)).first;
    auto p_it = paraphrases.find({cls, para});
    if (p_it == paraphrases.end()) {
      p_it = paraphrases.emplace(std::pair{cls, para}, MakeParaphrase(cfg, c_it->second, cls, para)).first;
    }
    out.push_back(Request{i, i, p_it->second.text, cls, p_it->second.embedding});
  }
  return out;
}

}  // namespace tiercache
