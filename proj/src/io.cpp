#include "knudsen/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "knudsen/errors.hpp"

namespace knudsen {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg.kv[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (...) {
    throw ConfigError("config key '" + key + "': not a number: " + it->second);
  }
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (...) {
    throw ConfigError("config key '" + key + "': not an integer: " + it->second);
  }
}

std::string KeyValueConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

TubeProfile profile_from_config(const KeyValueConfig& cfg) {
  const double eps = cfg.get_double("epsilon", 0.0);
  if (!(eps > 0.0)) throw ConfigError("profile: epsilon must be positive");
  const std::string mode = cfg.get("mode", "annulus");
  if (mode == "annulus") return TubeProfile::annulus(eps);
  if (mode != "perturbed") throw ConfigError("profile: mode must be annulus or perturbed");

  auto series = [&cfg](const std::string& prefix, double default_c0) {
    FourierSeries s;
    s.c0 = cfg.get_double(prefix + ".c0", default_c0);
    for (int k = 1; k <= TubeProfile::kMaxHarmonic; ++k) {
      const std::string ck = prefix + ".cos[" + std::to_string(k) + "]";
      const std::string sk = prefix + ".sin[" + std::to_string(k) + "]";
      if (cfg.has(ck)) {
        s.cos_coef.resize(k, 0.0);
        s.cos_coef[k - 1] = cfg.get_double(ck, 0.0);
      }
      if (cfg.has(sk)) {
        s.sin_coef.resize(k, 0.0);
        s.sin_coef[k - 1] = cfg.get_double(sk, 0.0);
      }
    }
    return s;
  };
  return TubeProfile::perturbed(eps, series("f", 1.0), series("g", 0.0));
}

KeyValueConfig profile_to_config(const TubeProfile& profile) {
  KeyValueConfig cfg;
  cfg.kv["epsilon"] = format_double(profile.epsilon);
  cfg.kv["mode"] = profile.is_annulus() ? "annulus" : "perturbed";
  if (!profile.is_annulus()) {
    auto dump = [&cfg](const std::string& prefix, const FourierSeries& s) {
      cfg.kv[prefix + ".c0"] = format_double(s.c0);
      for (std::size_t k = 0; k < s.cos_coef.size(); ++k)
        if (s.cos_coef[k] != 0.0)
          cfg.kv[prefix + ".cos[" + std::to_string(k + 1) + "]"] = format_double(s.cos_coef[k]);
      for (std::size_t k = 0; k < s.sin_coef.size(); ++k)
        if (s.sin_coef[k] != 0.0)
          cfg.kv[prefix + ".sin[" + std::to_string(k + 1) + "]"] = format_double(s.sin_coef[k]);
    };
    dump("f", profile.f);
    dump("g", profile.g);
  }
  return cfg;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    try {
      out.push_back(std::stod(token));
    } catch (...) {
      throw ConfigError("bad number in list: " + token);
    }
  }
  return out;
}

}  // namespace knudsen
