#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "knudsen/geometry.hpp"

namespace knudsen {

// shortest decimal string that round-trips the double exactly
std::string format_double(double v);

std::uint64_t fnv1a(std::string_view s);

// line-oriented "key = value" text; '#' starts a comment
struct KeyValueConfig {
  std::map<std::string, std::string> kv;

  static KeyValueConfig parse_text(const std::string& text);
  static KeyValueConfig parse_file(const std::string& path);

  bool has(const std::string& key) const { return kv.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  // canonical "key = value\n" dump, keys sorted
  std::string canonical() const;
};

// profile <-> key/value schema: epsilon, mode, f.c0, f.cos[k], f.sin[k],
// g.c0, g.cos[k], g.sin[k]
TubeProfile profile_from_config(const KeyValueConfig& cfg);
KeyValueConfig profile_to_config(const TubeProfile& profile);

std::vector<double> parse_double_list(const std::string& csv);

}  // namespace knudsen
