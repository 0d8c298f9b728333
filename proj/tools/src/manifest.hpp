#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace econoscale::cli {

using json = nlohmann::json;

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Files written under one output root. Paths are recorded relative to the
/// root with forward slashes.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path root, std::string prefix = "");

  void write(const std::string& name, std::string_view content);
  void write_json(const std::string& name, const json& value);

  /// Outputs of a nested directory, e.g. one replica.
  OutputSet subdir(const std::string& name) const;
  void absorb(const OutputSet& other);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::vector<std::string> sorted_files() const;

 private:
  std::filesystem::path root_;
  std::string prefix_;
  std::vector<std::string> files_;
};

/// JSON text as written to disk: two-space indentation and a final newline.
std::string pretty(const json& value);

struct InputRecord {
  std::string path;  // absolute
  std::string sha256;
};

struct Manifest {
  std::string command;
  json config;
  std::uint64_t seed = 0;
  std::string seed_source;  // flag, env, config or default
  std::uint64_t replicas = 1;
  std::string tool_version;
  std::vector<InputRecord> inputs;
  std::vector<std::string> outputs;

  /// SHA-256 of the canonical (key-sorted, compact) dump of command, config
  /// and replica count.
  std::string config_digest() const;

  json to_json() const;
  static Manifest from_json(const json& j);
};

inline constexpr std::string_view manifest_name = "manifest.json";

}  // namespace econoscale::cli
