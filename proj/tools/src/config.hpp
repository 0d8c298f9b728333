#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace econoscale::cli {

using json = nlohmann::json;

/// Invalid configuration; the tool exits with status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a JSON config file. Syntax errors become ConfigError.
json load_config_file(const std::filesystem::path& path);

/// Overlays `user` on `defaults`. Every user key must exist in the defaults
/// and match its type (a null default accepts any value); violations name the
/// dotted field path.
json merge_config(const json& defaults, const json& user, const std::string& path = "");

/// Sets a dotted path, creating intermediate objects.
void set_path(json& root, std::string_view dotted, json value);
const json& at_path(const json& root, std::string_view dotted);

// Typed accessors that report the dotted field path on mismatch.
double get_number(const json& root, std::string_view dotted);
std::optional<double> get_optional_number(const json& root, std::string_view dotted);
std::uint64_t get_unsigned(const json& root, std::string_view dotted);
std::optional<std::uint64_t> get_optional_unsigned(const json& root, std::string_view dotted);
bool get_bool(const json& root, std::string_view dotted);
std::string get_string(const json& root, std::string_view dotted);
std::optional<std::string> get_optional_string(const json& root, std::string_view dotted);
std::vector<double> get_number_list(const json& root, std::string_view dotted);
std::vector<std::uint64_t> get_unsigned_list(const json& root, std::string_view dotted);

/// Throws ConfigError "<field> must ..." unless `ok`.
void check(bool ok, std::string_view dotted, const std::string& requirement);

/// One of the listed strings, else ConfigError naming the choices.
std::string get_choice(const json& root, std::string_view dotted,
                       const std::vector<std::string>& choices);

}  // namespace econoscale::cli
