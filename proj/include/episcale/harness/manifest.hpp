#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

namespace episcale {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 init failed");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  }
  return hex.str();
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

struct ManifestFile {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct ReplicaSeeds {
  std::size_t population_size = 0;
  std::size_t replica = 0;
  std::uint64_t population_seed = 0;
  std::uint64_t dynamics_seed = 0;
};

/// Reproducibility record written as manifest.json in every run directory.
struct RunManifest {
  std::string command;
  std::string config_ini;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string tool_version = kToolVersion;
  std::string started;
  std::string finished;
  std::vector<ReplicaSeeds> replicas;
  std::vector<ManifestFile> files;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tool"] = "episcale";
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["seed"] = seed;
    j["workers"] = workers;
    j["started"] = started;
    j["finished"] = finished;
    j["config"] = config_ini;
    j["replicas"] = nlohmann::json::array();
    for (const auto& r : replicas) {
      j["replicas"].push_back({{"N", r.population_size},
                               {"replica", r.replica},
                               {"population_seed", r.population_seed},
                               {"dynamics_seed", r.dynamics_seed}});
    }
    j["files"] = nlohmann::json::array();
    for (const auto& f : files) {
      j["files"].push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    }
    return j;
  }

  static RunManifest from_json(const nlohmann::json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config_ini = j.at("config").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.workers = j.value("workers", std::size_t{1});
    m.tool_version = j.value("tool_version", std::string());
    m.started = j.value("started", std::string());
    m.finished = j.value("finished", std::string());
    for (const auto& r : j.value("replicas", nlohmann::json::array())) {
      m.replicas.push_back({r.at("N").get<std::size_t>(), r.at("replica").get<std::size_t>(),
                            r.at("population_seed").get<std::uint64_t>(),
                            r.at("dynamics_seed").get<std::uint64_t>()});
    }
    for (const auto& f : j.value("files", nlohmann::json::array())) {
      m.files.push_back({f.at("name").get<std::string>(), f.at("sha256").get<std::string>(),
                         f.at("bytes").get<std::uintmax_t>()});
    }
    return m;
  }

  /// Digest of every file in `dir` except the manifest itself, by name.
  void record_files(const std::filesystem::path& dir) {
    files.clear();
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().filename() != "manifest.json") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
      files.push_back({p.filename().string(), sha256_file(p), std::filesystem::file_size(p)});
    }
  }

  void write(const std::filesystem::path& dir) const {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    out << to_json().dump(2) << '\n';
  }

  static RunManifest read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read manifest " + path.string());
    return from_json(nlohmann::json::parse(in));
  }

  std::map<std::string, std::string> digests() const {
    std::map<std::string, std::string> out;
    for (const auto& f : files) out[f.name] = f.sha256;
    return out;
  }
};

}  // namespace episcale
