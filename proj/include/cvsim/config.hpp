#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvsim/circuit.hpp"

// Key=value configuration: a single INI-style file with one section per
// command plus a [run] section for seed/workers, or the "config" object of a
// previously written manifest. Flag overrides take precedence over the file,
// the file over built-in defaults.

namespace cvsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using KvMap = std::map<std::string, std::string>;

struct IniFile {
  std::map<std::string, KvMap> sections;

  const KvMap* section(const std::string& name) const {
    auto it = sections.find(name);
    return it == sections.end() ? nullptr : &it->second;
  }
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace detail

inline IniFile parse_ini(std::istream& in) {
  IniFile file;
  std::string line;
  std::string current;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
      }
      current = detail::trim(t.substr(1, t.size() - 2));
      file.sections[current];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    file.sections[current][key] = value;
  }
  return file;
}

// Typed access over one section's key/value map; finish() rejects keys that
// no reader consumed, naming the offender.
class ParamReader {
 public:
  ParamReader(KvMap kv, std::string section)
      : kv_(std::move(kv)), section_(std::move(section)) {}

  int get_int(const std::string& key, int def) {
    const std::string* v = fetch(key);
    if (!v) return def;
    return parse_ll(key, *v, INT32_MIN, INT32_MAX);
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t def) {
    const std::string* v = fetch(key);
    if (!v) return def;
    try {
      std::size_t pos = 0;
      const std::uint64_t x = std::stoull(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("");
      return x;
    } catch (const std::exception&) {
      throw bad_value(key, *v, "unsigned integer");
    }
  }

  double get_double(const std::string& key, double def) {
    const std::string* v = fetch(key);
    if (!v) return def;
    return parse_double(key, *v);
  }

  std::vector<int> get_int_list(const std::string& key, std::vector<int> def) {
    const std::string* v = fetch(key);
    if (!v) return def;
    std::vector<int> out;
    for (const std::string& item : split(*v)) {
      out.push_back(parse_ll(key, item, INT32_MIN, INT32_MAX));
    }
    if (out.empty()) throw bad_value(key, *v, "comma-separated integers");
    return out;
  }

  std::vector<double> get_double_list(const std::string& key, std::vector<double> def) {
    const std::string* v = fetch(key);
    if (!v) return def;
    std::vector<double> out;
    for (const std::string& item : split(*v)) out.push_back(parse_double(key, item));
    if (out.empty()) throw bad_value(key, *v, "comma-separated reals");
    return out;
  }

  ParityPolicy get_parity(const std::string& key, ParityPolicy def) {
    const std::string* v = fetch(key);
    if (!v) return def;
    if (*v == "odd-first") return ParityPolicy::OddFirst;
    if (*v == "even-first") return ParityPolicy::EvenFirst;
    if (*v == "random-equal-mix") return ParityPolicy::RandomEqualMix;
    throw bad_value(key, *v, "odd-first | even-first | random-equal-mix");
  }

  void finish() const {
    for (const auto& [key, value] : kv_) {
      if (!consumed_.count(key)) {
        throw ConfigError("unknown key '" + key + "' in section [" + section_ + "]");
      }
    }
  }

 private:
  const std::string* fetch(const std::string& key) {
    consumed_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? nullptr : &it->second;
  }

  ConfigError bad_value(const std::string& key, const std::string& v,
                        const std::string& want) const {
    return ConfigError("key '" + key + "' in section [" + section_ + "]: cannot parse '" +
                       v + "' (expected " + want + ")");
  }

  int parse_ll(const std::string& key, const std::string& v, long long lo, long long hi) {
    try {
      std::size_t pos = 0;
      const long long x = std::stoll(v, &pos);
      if (pos != v.size() || x < lo || x > hi) throw std::invalid_argument("");
      return static_cast<int>(x);
    } catch (const std::exception&) {
      throw bad_value(key, v, "integer");
    }
  }

  double parse_double(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return x;
    } catch (const std::exception&) {
      throw bad_value(key, v, "real number");
    }
  }

  static std::vector<std::string> split(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = detail::trim(item);
      if (!t.empty()) out.push_back(t);
    }
    return out;
  }

  KvMap kv_;
  std::string section_;
  std::set<std::string> consumed_;
};

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string format_double_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", xs[i]);
    out += buf;
  }
  return out;
}

inline std::string format_int_list(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

inline std::string parity_name(ParityPolicy p) {
  switch (p) {
    case ParityPolicy::OddFirst:
      return "odd-first";
    case ParityPolicy::EvenFirst:
      return "even-first";
    case ParityPolicy::RandomEqualMix:
      return "random-equal-mix";
  }
  return "random-equal-mix";
}

}  // namespace cvsim
