#include "heapforest/manifest.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace heapforest {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) parts.push_back(trim(cur));
  return parts;
}

double parse_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE)
    throw std::invalid_argument("manifest: key '" + key +
                                "' is not a number: " + value);
  return v;
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE ||
      value.find('-') != std::string::npos)
    throw std::invalid_argument("manifest: key '" + key +
                                "' is not a nonnegative integer: " + value);
  return v;
}

}  // namespace

Manifest Manifest::parse(const std::string& text) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("manifest: line " + std::to_string(lineno) +
                                  " has no '='");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("manifest: line " + std::to_string(lineno) +
                                  " has an empty key");
    if (m.has(key))
      throw std::invalid_argument("manifest: duplicate key '" + key + "'");
    m.entries_.emplace_back(key, value);
  }
  return m;
}

Manifest Manifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool Manifest::has(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

const std::string& Manifest::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw std::invalid_argument("manifest: missing required key '" + key + "'");
}

std::string Manifest::get_or(const std::string& key,
                             const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double Manifest::get_double(const std::string& key) const {
  return parse_double(key, get(key));
}

double Manifest::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

uint64_t Manifest::get_u64(const std::string& key) const {
  return parse_u64(key, get(key));
}

uint64_t Manifest::get_u64_or(const std::string& key, uint64_t fallback) const {
  return has(key) ? get_u64(key) : fallback;
}

bool Manifest::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw std::invalid_argument("manifest: key '" + key +
                              "' is not a boolean: " + v);
}

std::vector<double> Manifest::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& part : split_commas(get(key)))
    out.push_back(parse_double(key, part));
  if (out.empty())
    throw std::invalid_argument("manifest: key '" + key + "' is empty");
  return out;
}

std::vector<uint64_t> Manifest::get_u64_list(const std::string& key) const {
  std::vector<uint64_t> out;
  for (const std::string& part : split_commas(get(key)))
    out.push_back(parse_u64(key, part));
  if (out.empty())
    throw std::invalid_argument("manifest: key '" + key + "' is empty");
  return out;
}

void Manifest::require_keys(const std::vector<std::string>& required,
                            const std::vector<std::string>& optional) const {
  std::string unknown;
  for (const auto& [k, v] : entries_) {
    if (std::find(required.begin(), required.end(), k) != required.end())
      continue;
    if (std::find(optional.begin(), optional.end(), k) != optional.end())
      continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += k;
  }
  if (!unknown.empty())
    throw std::invalid_argument("manifest: unknown keys: " + unknown);
  for (const std::string& k : required)
    if (!has(k))
      throw std::invalid_argument("manifest: missing required key '" + k + "'");
}

void Manifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

}  // namespace heapforest
