#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "irspla/errors.hpp"

namespace irspla {

/// Flat `key = value` configuration text. `#` starts a comment, blank lines
/// are ignored, and later assignments override earlier ones.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text) {
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
      auto key = trim(line.substr(0, eq));
      auto value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
      cfg.values_[std::string(key)] = std::string(value);
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(it->second, key);
  }

  long long get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long long v = 0;
    const auto& s = it->second;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ConfigError("key '" + key + "': expected integer, got '" + s + "'");
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& s = it->second;
    if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "off" || s == "no") return false;
    throw ConfigError("key '" + key + "': expected boolean, got '" + s + "'");
  }

  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (auto part : split(it->second, ',')) out.push_back(parse_double(std::string(part), key));
    return out;
  }

  std::vector<std::string> get_strings(const std::string& key, std::vector<std::string> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::string> out;
    for (auto part : split(it->second, ',')) out.emplace_back(part);
    return out;
  }

  /// Accepts decimal numbers plus `inf`, `+inf` and `-inf`.
  static double parse_double(const std::string& s, const std::string& key) {
    if (s == "inf" || s == "+inf" || s == "Inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ConfigError("key '" + key + "': expected number, got '" + s + "'");
    return v;
  }

 private:
  static std::string_view trim(std::string_view s) {
    const char* ws = " \t\r";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  }

  static std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
      auto next = s.find(sep, pos);
      auto part = trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
      if (!part.empty()) parts.push_back(part);
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    return parts;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace irspla
