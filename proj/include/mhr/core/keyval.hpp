// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace mhr {

// Flat key=value text files ('#' comments, blank lines ignored). Used for
// both training and generator configs.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile parse(std::istream& in) {
    KeyValueFile kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      size_t a = line.find_first_not_of(" \t\r");
      if (a == std::string::npos) continue;
      size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ValidationError("config line " + std::to_string(lineno) + ": missing '='");
      auto trim = [](std::string s) {
        size_t b = s.find_first_not_of(" \t\r");
        size_t e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
      kv.values_[key] = value;
    }
    return kv;
  }

  static KeyValueFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config: " + path);
    return parse(in);
  }

  static KeyValueFile parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      size_t pos = 0;
      double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument(it->second);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "': not a number: " + it->second);
    }
  }
  long get_int(const std::string& key, long fallback) const {
    double v = get_double(key, static_cast<double>(fallback));
    long i = static_cast<long>(v);
    if (static_cast<double>(i) != v)
      throw ValidationError("config key '" + key + "': not an integer");
    return i;
  }
  std::vector<double> get_vector(const std::string& key,
                                 const std::vector<double>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::istringstream is(it->second);
    std::string tok;
    while (std::getline(is, tok, ','))
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "': bad vector entry: " + tok);
      }
    return out;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string serialize() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) os << k << "=" << v << "\n";
    return os.str();
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace mhr
