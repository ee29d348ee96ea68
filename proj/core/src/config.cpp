#include "cocarry/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cocarry/errors.hpp"

namespace cocarry {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& tok, int lineno) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + tok + "'", lineno);
  }
}

Config::Value parse_value(const std::string& raw, int lineno) {
  if (raw.empty()) throw ParseError("missing value", lineno);
  if (raw == "true") return true;
  if (raw == "false") return false;
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      throw ParseError("unterminated string", lineno);
    return raw.substr(1, raw.size() - 2);
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') throw ParseError("unterminated array", lineno);
    std::vector<double> arr;
    std::stringstream ss(raw.substr(1, raw.size() - 2));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (!tok.empty()) arr.push_back(parse_number(tok, lineno));
    }
    return arr;
  }
  return parse_number(raw, lineno);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside of strings.
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ParseError("empty section name", lineno);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", lineno);
    const std::string full = section.empty() ? key : section + "." + key;
    cfg.entries_[full] = parse_value(trim(line.substr(eq + 1)), lineno);
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

namespace {
[[noreturn]] void missing(const std::string& key) {
  throw ConfigError("missing required config key '" + key + "'");
}
[[noreturn]] void wrong_type(const std::string& key, const char* want) {
  throw ConfigError("config key '" + key + "' is not a " + std::string(want));
}
}  // namespace

double Config::get_double(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) missing(key);
  if (const double* v = std::get_if<double>(&it->second)) return *v;
  wrong_type(key, "number");
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? static_cast<int>(get_double(key)) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (const bool* v = std::get_if<bool>(&it->second)) return *v;
  wrong_type(key, "boolean");
}

std::string Config::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) missing(key);
  if (const std::string* v = std::get_if<std::string>(&it->second)) return *v;
  wrong_type(key, "string");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

std::vector<double> Config::get_array(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) missing(key);
  if (const auto* v = std::get_if<std::vector<double>>(&it->second)) return *v;
  wrong_type(key, "array");
}

std::vector<double> Config::get_array(const std::string& key,
                                      const std::vector<double>& fallback) const {
  return has(key) ? get_array(key) : fallback;
}

Vec3 Config::get_vec3(const std::string& key, const Vec3& fallback) const {
  if (!has(key)) return fallback;
  const auto arr = get_array(key);
  if (arr.size() != 3)
    throw ConfigError("config key '" + key + "' must be a 3-element array");
  return Vec3(arr[0], arr[1], arr[2]);
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [key, value] : entries_) {
    mix(key);
    mix("=");
    std::ostringstream os;
    os.precision(17);
    if (const double* d = std::get_if<double>(&value)) {
      os << *d;
    } else if (const bool* b = std::get_if<bool>(&value)) {
      os << (*b ? "true" : "false");
    } else if (const std::string* s = std::get_if<std::string>(&value)) {
      os << '"' << *s << '"';
    } else {
      for (double d : std::get<std::vector<double>>(value)) os << d << ',';
    }
    mix(os.str());
    mix(";");
  }
  return h;
}

}  // namespace cocarry
