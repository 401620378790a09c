#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include "dynamics.hpp"
#include "error.hpp"
#include "params.hpp"

namespace rockcan {

// Flat TOML subset: [section] headers, key = number | "string" | true/false, # comments.
using ConfigValue = std::variant<double, std::string, bool>;

class Config {
 public:
  static Config parse(std::istream& in) {
    Config cfg;
    std::string raw, section;
    int lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      const std::string line = trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) throw ConfigError("bad section header: " + line, lineno);
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty() || section.front() == '[') throw ConfigError("unsupported section header: " + line, lineno);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value: " + line, lineno);
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty() || val.empty()) throw ConfigError("empty key or value: " + line, lineno);
      const std::string full = section.empty() ? key : section + "." + key;
      if (cfg.values_.count(full)) throw ConfigError("duplicate key: " + full, lineno);
      cfg.values_[full] = parse_value(val, lineno);
    }
    return cfg;
  }

  static Config parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  static Config load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    return parse(f);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<double> number(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (auto d = std::get_if<double>(&it->second)) return *d;
    throw ConfigError("expected a number for " + key);
  }

  std::optional<std::string> string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (auto s = std::get_if<std::string>(&it->second)) return *s;
    throw ConfigError("expected a string for " + key);
  }

  std::optional<bool> boolean(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (auto b = std::get_if<bool>(&it->second)) return *b;
    throw ConfigError("expected true/false for " + key);
  }

  const std::map<std::string, ConfigValue>& values() const { return values_; }

 private:
  std::map<std::string, ConfigValue> values_;

  static std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

  static std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') in_str = !in_str;
      if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
  }

  static ConfigValue parse_value(const std::string& v, int lineno) {
    if (v.front() == '"') {
      if (v.size() < 2 || v.back() != '"') throw ConfigError("unterminated string: " + v, lineno);
      return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    std::string digits;
    for (char ch : v)
      if (ch != '_') digits += ch;
    double d = 0;
    const char* first = digits.data();
    if (!digits.empty() && digits.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, digits.data() + digits.size(), d);
    if (ec != std::errc() || ptr != digits.data() + digits.size())
      throw ConfigError("unsupported value: " + v, lineno);
    return d;
  }
};

// [can] from either (a, c, h) or (m, H, R, A, C); R and g optional in the first form.
inline CanParameters can_from_config(const Config& cfg) {
  const bool nondim = cfg.has("can.a") || cfg.has("can.c") || cfg.has("can.h");
  const bool dim = cfg.has("can.m") || cfg.has("can.H") || cfg.has("can.A") || cfg.has("can.C");
  if (nondim && dim) throw ConfigError("[can] mixes (a, c, h) with (m, H, A, C)");
  auto need = [&](const char* k) {
    auto v = cfg.number(std::string("can.") + k);
    if (!v) throw ConfigError(std::string("[can] missing key ") + k);
    return *v;
  };
  const double g = cfg.number("can.g").value_or(9.81);
  if (nondim) return from_nondimensional(need("a"), need("c"), need("h"), cfg.number("can.R").value_or(0.037), g);
  if (dim) return derive(DimensionalCan{need("m"), need("H"), need("R"), need("A"), need("C"), g});
  throw ConfigError("[can] section missing");
}

inline RateClock parse_rate_clock(const std::string& s) {
  if (s == "physical") return RateClock::Physical;
  if (s == "full") return RateClock::Full;
  if (s == "reduced") return RateClock::Reduced;
  throw ConfigError("rate clock must be physical, full or reduced, got " + s);
}

inline const char* to_string(RateClock c) {
  switch (c) {
    case RateClock::Physical: return "physical";
    case RateClock::Full: return "full";
    case RateClock::Reduced: return "reduced";
  }
  return "physical";
}

struct InitialCondition {
  State state;  // rates in `clock`
  RateClock clock = RateClock::Physical;
};

// Optional [ic] section: psi, Psi, phi, Phi, theta, Theta, clock.
inline std::optional<InitialCondition> ic_from_config(const Config& cfg) {
  if (!cfg.has("ic.phi")) return std::nullopt;
  auto n = [&](const char* k) { return cfg.number(std::string("ic.") + k).value_or(0.0); };
  InitialCondition ic;
  ic.state = state_from_ic(n("psi"), n("Psi"), n("phi"), n("Phi"), n("theta"), n("Theta"));
  if (auto c = cfg.string("ic.clock")) ic.clock = parse_rate_clock(*c);
  return ic;
}

}  // namespace rockcan
