#pragma once

// Flat key=value configuration text. Blank lines and lines starting with '#'
// are ignored; keys may not repeat.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rad2img/csv.hpp"
#include "rad2img/error.hpp"

namespace rad2img {

using ConfigMap = std::map<std::string, std::string, std::less<>>;

inline ConfigMap parse_config(std::string_view text, std::string_view source = "config") {
  auto trim = [](std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string_view{};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  ConfigMap out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    auto where = std::string(source) + " line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ValidationError(where + ": expected key=value");
    auto key = std::string(trim(line.substr(0, eq)));
    if (key.empty()) throw ValidationError(where + ": empty key");
    if (out.count(key)) throw ValidationError(where + ": duplicate key '" + key + "'");
    out.emplace(std::move(key), std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

inline ConfigMap load_config(const std::filesystem::path& path) {
  return parse_config(csv::read_file(path), path.string());
}

/// Appends `--key=value` for every config key not already given as a flag,
/// so explicit flags win.
inline std::vector<std::string> merge_config_args(std::vector<std::string> args,
                                                  const ConfigMap& config) {
  for (const auto& [key, value] : config) {
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        present = true;
        break;
      }
    }
    if (!present) args.push_back(flag + "=" + value);
  }
  return args;
}

}  // namespace rad2img
