#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace elspot {

// FNV-1a fingerprints for reproducibility bookkeeping (not cryptographic).
std::uint64_t fingerprint_bytes(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fingerprint_string(const std::string& s);
std::uint64_t fingerprint_file(const std::string& path);
std::string fingerprint_hex(std::uint64_t h);

// One stage of a pipeline run: wall time and the digests of what it wrote.
struct StageRecord {
  std::string name;
  double wall_ms = 0.0;
  std::map<std::string, std::string> outputs;  // path -> hex digest
};

struct RunManifest {
  std::string version;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;  // path -> hex digest
  std::vector<StageRecord> stages;

  void add_stage(const std::string& name, double wall_ms,
                 const std::vector<std::string>& output_paths);
  void save(const std::string& path) const;
};

}  // namespace elspot
