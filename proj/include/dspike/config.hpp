#pragma once

#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dspike/csv.hpp"

namespace dspike {

/// Flat key=value settings. Blank lines and lines starting with '#' are
/// ignored; a repeated key is an error.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>") {
    KeyValueConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto body = detail::trim(line);
      if (body.empty() || body.front() == '#') continue;
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) {
        throw std::runtime_error(source + ":" + std::to_string(lineno) + ": expected key=value");
      }
      std::string key(detail::trim(body.substr(0, eq)));
      std::string value(detail::trim(body.substr(eq + 1)));
      if (key.empty()) throw std::runtime_error(source + ":" + std::to_string(lineno) + ": empty key");
      if (!cfg.values_.emplace(key, value).second) {
        throw std::runtime_error(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
      }
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse(in, path);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  /// Throws on any key outside `known`.
  void require_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_)
      if (!known.count(k)) throw std::runtime_error("unknown config key '" + k + "'");
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v = 0.0;
    if (!detail::parse_double(it->second, v)) bad(key, it->second);
    return v;
  }

  std::size_t get_size(const std::string& key, std::size_t fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      bad(key, values_.at(key));
    }
    return static_cast<std::size_t>(v);
  }

  /// Comma-separated list of numbers.
  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (auto f : detail::split(it->second, ',')) {
      double v = 0.0;
      if (!detail::parse_double(f, v)) bad(key, it->second);
      out.push_back(v);
    }
    return out;
  }

 private:
  [[noreturn]] static void bad(const std::string& key, const std::string& value) {
    throw std::runtime_error("config key '" + key + "': cannot parse '" + value + "'");
  }

  std::map<std::string, std::string> values_;
};

}  // namespace dspike
