#include "manifest.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <openssl/evp.h>

#include "econoscale/error.hpp"

namespace econoscale::cli {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

OutputSet::OutputSet(std::filesystem::path root, std::string prefix)
    : root_(std::move(root)), prefix_(std::move(prefix)) {}

void OutputSet::write(const std::string& name, std::string_view content) {
  const auto rel = prefix_.empty() ? name : prefix_ + "/" + name;
  const auto path = root_ / rel;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorCode::io_error, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  files_.push_back(rel);
}

void OutputSet::write_json(const std::string& name, const json& value) {
  write(name, pretty(value));
}

OutputSet OutputSet::subdir(const std::string& name) const {
  return OutputSet(root_, prefix_.empty() ? name : prefix_ + "/" + name);
}

void OutputSet::absorb(const OutputSet& other) {
  files_.insert(files_.end(), other.files_.begin(), other.files_.end());
}

std::vector<std::string> OutputSet::sorted_files() const {
  auto out = files_;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string pretty(const json& value) { return value.dump(2) + "\n"; }

std::string Manifest::config_digest() const {
  const json canon = {{"command", command}, {"config", config}, {"replicas", replicas}};
  return "sha256:" + sha256_hex(canon.dump());
}

json Manifest::to_json() const {
  json in = json::array();
  for (const auto& r : inputs) in.push_back({{"path", r.path}, {"sha256", r.sha256}});
  return {
      {"command", command},
      {"config", config},
      {"config_digest", config_digest()},
      {"seed", seed},
      {"seed_source", seed_source},
      {"replicas", replicas},
      {"tool_version", tool_version},
      {"inputs", in},
      {"outputs", outputs},
  };
}

Manifest Manifest::from_json(const json& j) {
  Manifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.seed_source = j.at("seed_source").get<std::string>();
    m.replicas = j.at("replicas").get<std::uint64_t>();
    m.tool_version = j.at("tool_version").get<std::string>();
    for (const auto& r : j.at("inputs")) {
      m.inputs.push_back({r.at("path").get<std::string>(), r.at("sha256").get<std::string>()});
    }
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("malformed manifest: ") + e.what());
  }
  if (j.contains("config_digest") && j.at("config_digest") != m.config_digest()) {
    fail(ErrorCode::parse_error, "manifest config_digest does not match its config");
  }
  return m;
}

}  // namespace econoscale::cli
