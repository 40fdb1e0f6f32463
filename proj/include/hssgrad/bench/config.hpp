#pragma once

// Flat "[section] key = value" configuration files for the benchmark tool.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hssgrad::bench {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lines are `[section]`, `key = value`, blank, or comments starting with
/// '#' or ';'. Keys before any section header land in section "".
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string section;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(strip_comment(line));
      if (t.empty()) continue;
      if (t.front() == '[') {
        if (t.back() != ']') throw ConfigError(where(lineno) + "unterminated section header");
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError(where(lineno) + "expected key = value");
      const std::string key = trim(t.substr(0, eq));
      if (key.empty()) throw ConfigError(where(lineno) + "empty key");
      cfg.values_[section][key] = trim(t.substr(eq + 1));
    }
    return cfg;
  }

  static KeyValueConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static KeyValueConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in);
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    return s != values_.end() && s->second.count(key) > 0;
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    if (!has(section, key)) return std::nullopt;
    return values_.at(section).at(key);
  }

  void set(const std::string& section, const std::string& key, std::string value) {
    values_[section][key] = std::move(value);
  }

  template <class T>
  std::optional<T> get(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    return convert<T>(*v, section + "." + key);
  }

  template <class T>
  T get_or(const std::string& section, const std::string& key, T fallback) const {
    return get<T>(section, key).value_or(std::move(fallback));
  }

  /// Comma-separated list.
  template <class T>
  std::optional<std::vector<T>> get_list(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    std::vector<T> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(convert<T>(item, section + "." + key));
    }
    return out;
  }

  const std::map<std::string, std::map<std::string, std::string>>& sections() const { return values_; }

  template <class T>
  static T convert(const std::string& text, const std::string& name) {
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "on" || text == "yes" || text == "1") return true;
      if (text == "false" || text == "off" || text == "no" || text == "0") return false;
      throw ConfigError(name + ": not a boolean: " + text);
    } else if constexpr (std::is_floating_point_v<T>) {
      std::size_t pos = 0;
      T v{};
      try {
        v = static_cast<T>(std::stod(text, &pos));
      } catch (const std::exception&) {
        throw ConfigError(name + ": not a number: " + text);
      }
      if (pos != text.size()) throw ConfigError(name + ": not a number: " + text);
      return v;
    } else {
      T v{};
      const auto* end = text.data() + text.size();
      const auto [p, ec] = std::from_chars(text.data(), end, v);
      if (ec != std::errc() || p != end) throw ConfigError(name + ": not an integer: " + text);
      return v;
    }
  }

 private:
  static std::string strip_comment(const std::string& s) {
    const auto p = s.find_first_of("#;");
    return p == std::string::npos ? s : s.substr(0, p);
  }
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
  static std::string where(std::size_t lineno) { return "config line " + std::to_string(lineno) + ": "; }

  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace hssgrad::bench
