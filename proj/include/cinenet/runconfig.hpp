#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cinenet/common.hpp"

namespace cinenet {

/// Flat key=value settings file: one setting per line, full-line # comments,
/// duplicate and unknown keys rejected. Every getter records the value it
/// actually used, so effective() can materialize the complete configuration
/// including defaults.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig from_string(const std::string& text, const std::string& origin = "<config>") {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view sv = trim(line);
      if (sv.empty() || sv.front() == '#') continue;
      auto eq = sv.find('=');
      if (eq == std::string_view::npos)
        throw ParseError(origin + ":" + std::to_string(line_no) + ": expected key=value");
      std::string key(trim(sv.substr(0, eq)));
      std::string value(trim(sv.substr(eq + 1)));
      if (key.empty())
        throw ParseError(origin + ":" + std::to_string(line_no) + ": empty key");
      for (char c : key)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.')
          throw ParseError(origin + ":" + std::to_string(line_no) + ": bad key '" + key + "'");
      if (!cfg.raw_.emplace(key, value).second)
        throw ParseError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                         "'");
    }
    return cfg;
  }

  static RunConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path);
  }

  bool has(const std::string& key) const { return raw_.count(key) > 0; }

  /// Command-line overrides land here before any getter runs.
  void override_value(const std::string& key, const std::string& value) { raw_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) {
    auto it = raw_.find(key);
    std::string v = it != raw_.end() ? it->second : fallback;
    note(key, v);
    return v;
  }

  long long get_ll(const std::string& key, long long fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) {
      note(key, std::to_string(fallback));
      return fallback;
    }
    long long v = parse_ll(it->second, "config key " + key);
    note(key, it->second);
    return v;
  }

  double get_double(const std::string& key, double fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) {
      note(key, format_double(fallback));
      return fallback;
    }
    double v = parse_double(it->second, "config key " + key);
    note(key, it->second);
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) {
      note(key, fallback ? "true" : "false");
      return fallback;
    }
    const std::string& s = it->second;
    bool v;
    if (s == "true" || s == "1" || s == "on" || s == "yes") {
      v = true;
    } else if (s == "false" || s == "0" || s == "off" || s == "no") {
      v = false;
    } else {
      throw ParseError("config key " + key + ": expected a boolean, got '" + s + "'");
    }
    note(key, s);
    return v;
  }

  uint64_t get_u64(const std::string& key, uint64_t fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) {
      note(key, std::to_string(fallback));
      return fallback;
    }
    const std::string& s = it->second;
    uint64_t v = 0;
    if (s.empty() || s.find('-') != std::string::npos)
      throw ParseError("config key " + key + ": expected an unsigned integer, got '" + s + "'");
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ParseError("config key " + key + ": expected an unsigned integer, got '" + s + "'");
    note(key, s);
    return v;
  }

  /// The seed has no default anywhere: every run names one explicitly.
  uint64_t require_seed() {
    if (!has("seed")) throw ValidationError("config: missing mandatory key 'seed'");
    return get_u64("seed", 0);
  }

  std::vector<double> get_double_list(const std::string& key, const std::string& fallback) {
    auto it = raw_.find(key);
    const std::string& s = it != raw_.end() ? it->second : fallback;
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) {
      std::string t(trim(tok));
      if (t.empty()) throw ParseError("config key " + key + ": empty list element");
      out.push_back(parse_double(t, "config key " + key));
    }
    if (out.empty()) throw ParseError("config key " + key + ": empty list");
    note(key, s);
    return out;
  }

  /// Call after all getters: any raw key never consumed is a typo or an
  /// unsupported setting and aborts the run.
  void reject_unknown() const {
    std::string bad;
    for (const auto& [k, v] : raw_)
      if (!consumed_.count(k)) bad += bad.empty() ? k : ", " + k;
    if (!bad.empty()) throw ValidationError("config: unknown keys: " + bad);
  }

  /// Sorted key=value lines of everything consumed, defaults included.
  std::string effective() const {
    std::string out;
    for (const auto& [k, v] : effective_) out += k + "=" + v + "\n";
    return out;
  }

 private:
  void note(const std::string& key, const std::string& value) {
    consumed_.insert(key);
    effective_[key] = value;
  }

  std::map<std::string, std::string> raw_;
  std::map<std::string, std::string> effective_;
  std::set<std::string> consumed_;
};

}  // namespace cinenet
