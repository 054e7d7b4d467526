#pragma once

#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "osb/errors.hpp"
#include "osb/map_family.hpp"

namespace osb {

/// Run settings shared by all subcommands.
struct Settings {
  std::uint64_t seed = 1;
  std::uint64_t enum_cap = kDefaultEnumerationCap;
  std::uint64_t mc_samples = 0;
  std::string format = "json";
  std::size_t workers = 1;
};

/// key = value lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_key_value(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

namespace detail {

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    throw ParseError("setting " + key + ": not an unsigned integer: '" + v + "'");
  }
  if (used != v.size() || v.empty() || v[0] == '-') throw ParseError("setting " + key + ": not an unsigned integer: '" + v + "'");
  return x;
}

inline void apply(Settings& s, const std::string& key, const std::string& value) {
  if (key == "seed") {
    s.seed = parse_u64(key, value);
  } else if (key == "enum_cap") {
    s.enum_cap = parse_u64(key, value);
  } else if (key == "mc_samples") {
    s.mc_samples = parse_u64(key, value);
  } else if (key == "format") {
    if (value != "json" && value != "csv") throw ParseError("setting format must be json or csv");
    s.format = value;
  } else if (key == "workers") {
    s.workers = static_cast<std::size_t>(std::max<std::uint64_t>(1, parse_u64(key, value)));
  } else {
    throw ParseError("unknown setting '" + key + "'");
  }
}

}  // namespace detail

inline constexpr const char* kSettingKeys[] = {"seed", "enum_cap", "mc_samples", "format", "workers"};

/// Precedence: command-line flags > OSB_* environment variables > config file > defaults.
inline Settings resolve_settings(const std::map<std::string, std::string>& flags, const EnvLookup& env,
                                 const std::map<std::string, std::string>& file) {
  Settings s;
  for (const auto& [k, v] : file) detail::apply(s, k, v);
  for (const char* key : kSettingKeys) {
    std::string var = "OSB_";
    for (const char* c = key; *c; ++c) var += static_cast<char>(std::toupper(static_cast<unsigned char>(*c)));
    if (auto v = env(var)) detail::apply(s, key, *v);
  }
  for (const auto& [k, v] : flags) detail::apply(s, k, v);
  return s;
}

}  // namespace osb
