#include "elspot/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "elspot/errors.hpp"

namespace elspot {

std::uint64_t fingerprint_bytes(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fingerprint_string(const std::string& s) {
  return fingerprint_bytes(s.data(), s.size());
}

std::uint64_t fingerprint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot fingerprint missing file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fingerprint_bytes(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

std::string fingerprint_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunManifest::add_stage(const std::string& name, double wall_ms,
                            const std::vector<std::string>& output_paths) {
  StageRecord rec;
  rec.name = name;
  rec.wall_ms = wall_ms;
  for (const auto& p : output_paths) rec.outputs[p] = fingerprint_hex(fingerprint_file(p));
  stages.push_back(std::move(rec));
}

void RunManifest::save(const std::string& path) const {
  nlohmann::json j;
  j["schema"] = "elspot.manifest/1";
  j["version"] = version;
  j["config_digest"] = config_digest;
  j["seed"] = seed;
  j["inputs"] = inputs;
  nlohmann::json stages_json = nlohmann::json::array();
  for (const auto& s : stages) {
    stages_json.push_back({{"name", s.name}, {"wall_ms", s.wall_ms}, {"outputs", s.outputs}});
  }
  j["stages"] = stages_json;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write manifest: " + path);
  out << j.dump(1, '\t') << '\n';
}

}  // namespace elspot
