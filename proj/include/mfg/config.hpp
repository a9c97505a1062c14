#pragma once

// Run configuration: flat `key = value` text grouped under `[section]`
// headers, with `#` comments. Every lookup is typed and every error names
// the line and the field.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/csv.hpp"

namespace mfg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KeyValueConfig {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  static KeyValueConfig parse(std::istream& in, std::string source = "config") {
    KeyValueConfig cfg;
    cfg.source_ = std::move(source);
    std::string section, raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      std::string text = raw.substr(0, raw.find('#'));
      trim(text);
      if (text.empty()) continue;
      if (text.front() == '[') {
        if (text.back() != ']' || text.size() < 3) cfg.fail(line, "malformed section header '" + text + "'");
        section = text.substr(1, text.size() - 2);
        trim(section);
        continue;
      }
      const auto eq = text.find('=');
      if (eq == std::string::npos) cfg.fail(line, "expected 'key = value', got '" + text + "'");
      std::string key = text.substr(0, eq), value = text.substr(eq + 1);
      trim(key);
      trim(value);
      if (key.empty()) cfg.fail(line, "missing key before '='");
      if (section.empty()) cfg.fail(line, "key '" + key + "' appears before any [section]");
      const std::string full = section + "." + key;
      if (cfg.entries_.count(full)) cfg.fail(line, "duplicate key '" + full + "'");
      cfg.entries_[full] = {value, line};
    }
    return cfg;
  }

  static KeyValueConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse(in, path.string());
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::optional<std::string> raw(const std::string& key) const {
    used_.insert(key);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    auto v = raw(key);
    return v ? *v : fallback;
  }

  std::string required_string(const std::string& key) const {
    auto v = raw(key);
    if (!v) throw ConfigError(source_ + ": missing required field '" + key + "'");
    return *v;
  }

  double number(const std::string& key, double fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    return parse_number(key, *v);
  }

  std::optional<double> optional_number(const std::string& key) const {
    auto v = raw(key);
    if (!v) return std::nullopt;
    return parse_number(key, *v);
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    return parse_unsigned(key, *v);
  }

  std::optional<std::uint64_t> optional_unsigned(const std::string& key) const {
    auto v = raw(key);
    if (!v) return std::nullopt;
    return parse_unsigned(key, *v);
  }

  bool boolean(const std::string& key, bool fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "yes" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "0") return false;
    fail_field(key, "expected true or false, got '" + *v + "'");
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback = {}) const {
    auto v = raw(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (auto cell : csv::split(*v)) {
      std::string c(cell);
      trim(c);
      if (c.empty()) fail_field(key, "empty list element");
      out.push_back(parse_number(key, c));
    }
    return out;
  }

  /// Throws on keys that no lookup consumed (typos must not pass silently).
  void reject_unknown() const {
    for (const auto& [key, entry] : entries_)
      if (!used_.count(key)) fail(entry.line, "unknown field '" + key + "'");
  }

  [[noreturn]] void fail_field(const std::string& key, const std::string& what) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(source_ + ": field '" + key + "': " + what);
    fail(it->second.line, "field '" + key + "': " + what);
  }

  /// Resolved key/value pairs in section order.
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  static void trim(std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  [[noreturn]] void fail(std::size_t line, const std::string& what) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + what);
  }

  double parse_number(const std::string& key, const std::string& v) const {
    double x = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) fail_field(key, "expected a number, got '" + v + "'");
    return x;
  }

  std::uint64_t parse_unsigned(const std::string& key, const std::string& v) const {
    std::uint64_t x = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
      fail_field(key, "expected a non-negative integer, got '" + v + "'");
    return x;
  }

  std::string source_;
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace mfg
