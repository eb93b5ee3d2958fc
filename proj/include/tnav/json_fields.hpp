#pragma once

#include "tnav/common.hpp"

#include <json.hpp>

#include <set>
#include <string>
#include <vector>

namespace tnav {

/// Strict reader over one JSON object: every lookup is recorded so that
/// finish() can reject keys nobody asked for. Errors carry the dotted path.
class JsonFields {
 public:
  JsonFields(const nlohmann::json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(display(), "expected an object");
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw ConfigError(child(key), "missing required field");
    return obj_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(child(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  long long integer(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(child(key), "expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(child(key), "expected a boolean");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(child(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key, std::size_t n) {
    const auto& v = raw(key);
    if (!v.is_array() || v.size() != n) {
      throw ConfigError(child(key), "expected an array of " + std::to_string(n) + " numbers");
    }
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(child(key), "expected numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Vec2 vec2(const std::string& key) {
    const auto v = numbers(key, 2);
    return {v[0], v[1]};
  }

  /// Rejects keys that were never looked up.
  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError(child(key), "unknown field");
    }
  }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const nlohmann::json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace tnav
