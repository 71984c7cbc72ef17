#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "image.hpp"
#include "raster.hpp"
#include "tasks.hpp"

namespace geopix {

namespace fs = std::filesystem;

inline constexpr std::size_t kShardSize = 10000;
inline constexpr const char* kManifestName = "manifest.jsonl";
inline constexpr const char* kChecksumName = "SHA256SUMS";

// ---------------------------------------------------------------------------
// Checksums.

inline std::string sha256_hex(const std::vector<std::uint8_t>& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw DatasetError("SHA-256 computation failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

inline std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DatasetError("write failed for " + path.string());
}

inline std::string sha256_file(const fs::path& path) { return sha256_hex(read_bytes(path)); }

// ---------------------------------------------------------------------------
// Manifests.

struct InstanceManifest {
  Task task = Task::Steiner;
  std::string instance_id;
  std::uint64_t seed = 0;
  WorldToPixel world_to_pixel;
  nlohmann::json geometry;  // exact world coordinates, task specific
  std::string condition_png;  // relative to the shard directory
  std::string solution_png;

  friend bool operator==(const InstanceManifest&, const InstanceManifest&) = default;
};

inline nlohmann::json to_json(const InstanceManifest& m) {
  return {{"task", to_string(m.task)},
          {"instance_id", m.instance_id},
          {"seed", m.seed},
          {"world_to_pixel", m.world_to_pixel.m},
          {"geometry", m.geometry},
          {"condition_png", m.condition_png},
          {"solution_png", m.solution_png}};
}

inline InstanceManifest manifest_from_json(const nlohmann::json& j) {
  InstanceManifest m;
  m.task = parse_task(j.at("task").get<std::string>());
  m.instance_id = j.at("instance_id").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto w = j.at("world_to_pixel").get<std::vector<double>>();
  if (w.size() != 6) throw DatasetError("world_to_pixel must have 6 entries");
  std::copy(w.begin(), w.end(), m.world_to_pixel.m.begin());
  m.geometry = j.at("geometry");
  m.condition_png = j.at("condition_png").get<std::string>();
  m.solution_png = j.at("solution_png").get<std::string>();
  return m;
}

// `{task}_{split}_{index:08}`
inline std::string instance_id(Task task, const std::string& split, std::size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%08zu", index);
  return to_string(task) + "_" + split + "_" + buf;
}

// `{root}/{task}/{split}/shard_{k:05}`
inline fs::path shard_dir(const fs::path& root, Task task, const std::string& split, std::size_t shard) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "shard_%05zu", shard);
  return root / to_string(task) / split / buf;
}

struct ShardEntry {
  InstanceManifest manifest;
  ImagePair images;
};

struct ShardSummary {
  fs::path dir;
  std::size_t count = 0;
  std::string checksum;  // SHA-256 of the SHA256SUMS file
};

namespace detail {

inline std::map<std::string, std::string> read_checksums(const fs::path& dir) {
  std::ifstream in(dir / kChecksumName);
  if (!in) throw DatasetError("missing " + (dir / kChecksumName).string());
  std::map<std::string, std::string> sums;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto sep = line.find("  ");
    if (sep != 64) {
      throw DatasetError((dir / kChecksumName).string() + ":" + std::to_string(lineno) + ": malformed line");
    }
    sums[line.substr(sep + 2)] = line.substr(0, sep);
  }
  return sums;
}

inline void verify_checksums(const fs::path& dir) {
  for (const auto& [name, hash] : read_checksums(dir)) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) throw DatasetError("missing file " + p.string());
    if (sha256_file(p) != hash) throw DatasetError("checksum mismatch for " + p.string());
  }
}

}  // namespace detail

// Writes PNGs, the JSON-lines manifest (sorted by instance_id) and SHA256SUMS,
// then re-reads everything to verify the checksums.
inline ShardSummary write_shard(std::vector<ShardEntry> entries, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DatasetError("cannot create " + dir.string() + ": " + ec.message());
  std::sort(entries.begin(), entries.end(),
            [](const ShardEntry& a, const ShardEntry& b) { return a.manifest.instance_id < b.manifest.instance_id; });

  std::vector<std::pair<std::string, std::string>> sums;
  std::string manifest;
  for (const auto& e : entries) {
    for (const auto& [name, img] : {std::pair{e.manifest.condition_png, &e.images.condition},
                                    std::pair{e.manifest.solution_png, &e.images.solution}}) {
      const auto bytes = encode_png(*img);
      write_bytes(dir / name, bytes);
      sums.emplace_back(name, sha256_hex(bytes));
    }
    manifest += to_json(e.manifest).dump() + "\n";
  }
  const std::vector<std::uint8_t> manifest_bytes(manifest.begin(), manifest.end());
  write_bytes(dir / kManifestName, manifest_bytes);
  sums.emplace_back(kManifestName, sha256_hex(manifest_bytes));
  std::sort(sums.begin(), sums.end());

  std::string sumfile;
  for (const auto& [name, hash] : sums) sumfile += hash + "  " + name + "\n";
  const std::vector<std::uint8_t> sum_bytes(sumfile.begin(), sumfile.end());
  write_bytes(dir / kChecksumName, sum_bytes);

  detail::verify_checksums(dir);
  return {dir, entries.size(), sha256_hex(sum_bytes)};
}

inline std::vector<InstanceManifest> parse_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("missing manifest " + path.string());
  std::vector<InstanceManifest> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(manifest_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw DatasetError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// Instances in stored order. Every referenced PNG must exist and every file
// listed in SHA256SUMS must match.
inline std::vector<InstanceManifest> read_shard(const fs::path& dir) {
  auto out = parse_manifest(dir / kManifestName);
  for (const auto& m : out) {
    for (const auto& name : {m.condition_png, m.solution_png}) {
      if (!fs::exists(dir / name)) {
        throw DatasetError("instance " + m.instance_id + ": missing file " + (dir / name).string());
      }
    }
  }
  detail::verify_checksums(dir);
  return out;
}

inline std::string shard_checksum(const fs::path& dir) { return sha256_file(dir / kChecksumName); }

// All shard directories below `{root}/{task}/{split}`, in order.
inline std::vector<fs::path> list_shards(const fs::path& split_dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(split_dir)) return out;
  for (const auto& e : fs::directory_iterator(split_dir)) {
    if (e.is_directory() && e.path().filename().string().rfind("shard_", 0) == 0) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Samples produced by an external generator: one JSON object per line with
// `instance_id`, `seed` and `path` (relative to the samples file).

struct SampleRef {
  std::string instance_id;
  std::uint64_t seed = 0;
  fs::path path;
};

inline std::vector<SampleRef> read_samples(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DatasetError("missing samples manifest " + file.string());
  std::vector<SampleRef> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("instance_id").get<std::string>(), j.value("seed", std::uint64_t{0}),
                     file.parent_path() / j.at("path").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace geopix
