#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "crystal/types.hpp"

namespace crystal {

/// Flat key-value run configuration: one `key = value` per line, '#'
/// comments. Angles accept a `pi` suffix (e.g. `theta = 0.304pi`).
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse_file(const std::string& path);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Radians; a trailing `pi` multiplies by pi.
  double get_angle(const std::string& key, double fallback) const;

  /// Keys that were never read; used to reject typos.
  std::map<std::string, std::string> entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

double parse_angle(const std::string& text);

}  // namespace crystal
