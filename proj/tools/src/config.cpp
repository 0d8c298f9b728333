#include "config.hpp"

#include <cmath>
#include <fstream>

namespace econoscale::cli {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

bool compatible(const json& def, const json& v) {
  if (def.is_null()) return true;
  if (def.is_number()) return v.is_number();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  if (def.is_object()) return v.is_object();
  return false;
}

std::string type_name(const json& def) {
  if (def.is_number()) return "a number";
  if (def.is_boolean()) return "true or false";
  if (def.is_string()) return "a string";
  if (def.is_array()) return "a list";
  return "an object";
}

}  // namespace

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

json merge_config(const json& defaults, const json& user, const std::string& path) {
  if (!user.is_object()) {
    throw ConfigError((path.empty() ? std::string("config") : path) + " must be an object");
  }
  json out = defaults;
  for (const auto& [key, value] : user.items()) {
    const auto field = join(path, key);
    if (!defaults.contains(key)) throw ConfigError("unknown config field '" + field + "'");
    const auto& def = defaults.at(key);
    if (value.is_null()) {
      out[key] = value;
    } else if (def.is_object()) {
      out[key] = merge_config(def, value, field);
    } else if (!compatible(def, value)) {
      throw ConfigError(field + " must be " + type_name(def));
    } else if (def.is_number_float() && value.is_number_integer()) {
      // 1 and 1.0 must resolve (and digest) identically
      out[key] = value.get<double>();
    } else {
      out[key] = value;
    }
  }
  return out;
}

void set_path(json& root, std::string_view dotted, json value) {
  json* node = &root;
  std::size_t pos = 0;
  while (true) {
    const auto dot = dotted.find('.', pos);
    const std::string key(dotted.substr(pos, dot == std::string_view::npos ? dotted.npos : dot - pos));
    if (dot == std::string_view::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

const json& at_path(const json& root, std::string_view dotted) {
  static const json null_value;
  const json* node = &root;
  std::size_t pos = 0;
  while (true) {
    const auto dot = dotted.find('.', pos);
    const std::string key(dotted.substr(pos, dot == std::string_view::npos ? dotted.npos : dot - pos));
    if (!node->is_object() || !node->contains(key)) return null_value;
    node = &node->at(key);
    if (dot == std::string_view::npos) return *node;
    pos = dot + 1;
  }
}

void check(bool ok, std::string_view dotted, const std::string& requirement) {
  if (!ok) throw ConfigError(std::string(dotted) + " " + requirement);
}

std::optional<double> get_optional_number(const json& root, std::string_view dotted) {
  const auto& v = at_path(root, dotted);
  if (v.is_null()) return std::nullopt;
  check(v.is_number(), dotted, "must be a number");
  const double d = v.get<double>();
  check(std::isfinite(d), dotted, "must be finite");
  return d;
}

double get_number(const json& root, std::string_view dotted) {
  const auto v = get_optional_number(root, dotted);
  check(v.has_value(), dotted, "is required");
  return *v;
}

std::optional<std::uint64_t> get_optional_unsigned(const json& root, std::string_view dotted) {
  const auto& v = at_path(root, dotted);
  if (v.is_null()) return std::nullopt;
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    check(v.get<std::int64_t>() >= 0, dotted, "must be a non-negative integer");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    check(d >= 0.0 && d == std::floor(d) && d < 1.8e19, dotted, "must be a non-negative integer");
    return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(std::string(dotted) + " must be a non-negative integer");
}

std::uint64_t get_unsigned(const json& root, std::string_view dotted) {
  const auto v = get_optional_unsigned(root, dotted);
  check(v.has_value(), dotted, "is required");
  return *v;
}

bool get_bool(const json& root, std::string_view dotted) {
  const auto& v = at_path(root, dotted);
  check(v.is_boolean(), dotted, "must be true or false");
  return v.get<bool>();
}

std::optional<std::string> get_optional_string(const json& root, std::string_view dotted) {
  const auto& v = at_path(root, dotted);
  if (v.is_null()) return std::nullopt;
  check(v.is_string(), dotted, "must be a string");
  return v.get<std::string>();
}

std::string get_string(const json& root, std::string_view dotted) {
  const auto v = get_optional_string(root, dotted);
  check(v.has_value(), dotted, "is required");
  return *v;
}

std::string get_choice(const json& root, std::string_view dotted,
                       const std::vector<std::string>& choices) {
  const auto v = get_string(root, dotted);
  for (const auto& c : choices) {
    if (c == v) return v;
  }
  std::string list;
  for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
  throw ConfigError(std::string(dotted) + " must be one of {" + list + "}, got '" + v + "'");
}

std::vector<double> get_number_list(const json& root, std::string_view dotted) {
  const auto& v = at_path(root, dotted);
  if (v.is_null()) return {};
  check(v.is_array(), dotted, "must be a list of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    check(e.is_number() && std::isfinite(e.get<double>()), dotted, "must be a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::uint64_t> get_unsigned_list(const json& root, std::string_view dotted) {
  const auto& v = at_path(root, dotted);
  if (v.is_null()) return {};
  check(v.is_array(), dotted, "must be a list of non-negative integers");
  std::vector<std::uint64_t> out;
  for (const auto& e : v) {
    const bool ok = e.is_number_unsigned() ||
                    (e.is_number_integer() && e.get<std::int64_t>() >= 0);
    check(ok, dotted, "must be a list of non-negative integers");
    out.push_back(e.get<std::uint64_t>());
  }
  return out;
}

}  // namespace econoscale::cli
