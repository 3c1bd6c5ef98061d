#pragma once

// Plain-text experiment configuration: `[section]` headers with `key = value`
// lines, `#`/`;` comments, comma-separated numeric lists. Parsing is strict —
// unknown keys and malformed values are errors that name the offending field.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "zopd/vec.hpp"

namespace zopd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace detail

class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text) {
    ConfigFile cfg;
    cfg.raw_ = text;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::size_t comment = line.find_first_of("#;");
      if (comment != std::string::npos) line = line.substr(0, comment);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
        section = detail::trim(line.substr(1, line.size() - 2));
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
      cfg.values_[section + "." + key] = value;
    }
    return cfg;
  }

  static ConfigFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  const std::string& raw() const { return raw_; }

  bool has(const std::string& section, const std::string& key) const {
    return values_.count(section + "." + key) > 0;
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    const auto it = values_.find(section + "." + key);
    consumed_.insert(section + "." + key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string& section, const std::string& key) const {
    const auto it = values_.find(section + "." + key);
    if (it == values_.end())
      throw ConfigError("missing required config key [" + section + "] " + key);
    consumed_.insert(section + "." + key);
    return it->second;
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) {
      consumed_.insert(section + "." + key);
      return fallback;
    }
    return parse_double(section, key, require_string(section, key));
  }

  long get_long(const std::string& section, const std::string& key, long fallback) const {
    if (!has(section, key)) {
      consumed_.insert(section + "." + key);
      return fallback;
    }
    const std::string s = require_string(section, key);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || v != static_cast<double>(static_cast<long>(v)))
        throw std::invalid_argument(s);
      return static_cast<long>(v);
    } catch (const std::exception&) {
      throw ConfigError("config key [" + section + "] " + key + ": not an integer: " + s);
    }
  }

  std::uint64_t get_seed(const std::string& section, const std::string& key,
                         std::uint64_t fallback) const {
    if (!has(section, key)) {
      consumed_.insert(section + "." + key);
      return fallback;
    }
    const std::string s = require_string(section, key);
    try {
      return static_cast<std::uint64_t>(std::stoull(s));
    } catch (const std::exception&) {
      throw ConfigError("config key [" + section + "] " + key + ": not a seed: " + s);
    }
  }

  Vec get_vec(const std::string& section, const std::string& key, const Vec& fallback) const {
    if (!has(section, key)) {
      consumed_.insert(section + "." + key);
      return fallback;
    }
    const std::string s = require_string(section, key);
    Vec out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = detail::trim(item);
      if (item.empty()) continue;
      out.push_back(parse_double(section, key, item));
    }
    if (out.empty()) throw ConfigError("config key [" + section + "] " + key + ": empty list");
    return out;
  }

  std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                const std::vector<int>& fallback) const {
    if (!has(section, key)) {
      consumed_.insert(section + "." + key);
      return fallback;
    }
    const Vec v = get_vec(section, key, {});
    std::vector<int> out;
    for (double d : v) {
      if (d != static_cast<double>(static_cast<int>(d)) || d <= 0)
        throw ConfigError("config key [" + section + "] " + key + ": expected positive integers");
      out.push_back(static_cast<int>(d));
    }
    return out;
  }

  // Strictness: every key present in the file must have been consumed.
  void reject_unknown_keys() const {
    for (const auto& [full_key, value] : values_) {
      (void)value;
      if (!consumed_.count(full_key))
        throw ConfigError("unknown config key: " + full_key);
    }
  }

 private:
  double parse_double(const std::string& section, const std::string& key,
                      const std::string& s) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key [" + section + "] " + key + ": not a number: " + s);
    }
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
  std::string raw_;
};

}  // namespace zopd
