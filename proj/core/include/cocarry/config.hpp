#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "cocarry/types.hpp"

namespace cocarry {

/// Minimal TOML-style scenario configuration: [section] headers, `key =
/// value` lines, `#` comments. Values are numbers, booleans, quoted strings,
/// or flat arrays of numbers. Keys are addressed as "section.key".
class Config {
 public:
  using Value = std::variant<double, bool, std::string, std::vector<double>>;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_array(const std::string& key) const;
  std::vector<double> get_array(const std::string& key, const std::vector<double>& fallback) const;
  Vec3 get_vec3(const std::string& key, const Vec3& fallback) const;

  /// FNV-1a over the canonically serialized (sorted) entries; reports are
  /// stamped with this so every run is auditable against its knobs.
  std::uint64_t hash() const;

  const std::string& origin() const { return origin_; }
  const std::map<std::string, Value>& entries() const { return entries_; }
  void set(const std::string& key, Value v) { entries_[key] = std::move(v); }

 private:
  std::map<std::string, Value> entries_;
  std::string origin_;
};

}  // namespace cocarry
