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

#include "tiercache/manifest.h"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <memory>

#include "tiercache/errors.h"

namespace tiercache {

std::string Sha256File(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for hashing");

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 init failed");
  }
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);

  std::string hex;
  hex.reserve(len * 2);
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

nlohmann::ordered_json RunManifest::ToJson() const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["config"] = config;
  nlohmann::ordered_json in = nlohmann::ordered_json::object();
  for (const auto& [role, pd] : inputs) in[role] = {{"path", pd.first}, {"sha256", pd.second}};
  j["inputs"] = in;
  j["outputs"] = outputs;
  j["seeds"] = seeds;
  return j;
}

RunManifest RunManifest::FromJson(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.version = j.at("version").get<std::string>();
    m.config = j.at("config");
    for (const auto& [role, v] : j.at("inputs").items()) {
      m.inputs[role] = {v.at("path").get<std::string>(), v.at("sha256").get<std::string>()};
    }
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void RunManifest::Write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << ToJson().dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

RunManifest RunManifest::Read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed manifest " + path.string() + ": " + e.what());
  }
  return FromJson(j);
}

void RunManifest::VerifyInputs() const {
  for (const auto& [role, pd] : inputs) {
    const std::string actual = Sha256File(pd.first);
    if (actual != pd.second) {
      throw ValidationError("input '" + role + "' (" + pd.first + ") does not match the manifest: "
                            "expected sha256 " + pd.second + ", found " + actual);
    }
  }
}

}  // namespace tiercache
