#include "addbo/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace addbo {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string &key, const std::string &text) {
  double v = 0.0;
  const auto *first = text.data();
  const auto *last = text.data() + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw ConfigError(key, "invalid number '" + text + "' for key '" + key + "'");
  return v;
}

} // namespace

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty())
      out.push_back(item);
  }
  return out;
}

KeyValueConfig KeyValueConfig::parse(const std::string &text, const std::string &source) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("", source + ":" + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string KeyValueConfig::get_string(const std::string &key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError(key, "missing key '" + key + "'");
  return it->second;
}

double KeyValueConfig::get_double(const std::string &key) const { return to_double(key, get_string(key)); }

long KeyValueConfig::get_int(const std::string &key) const {
  const std::string text = get_string(key);
  long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError(key, "invalid integer '" + text + "' for key '" + key + "'");
  return v;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string &key) const {
  std::vector<double> out;
  for (const auto &item : split_list(get_string(key)))
    out.push_back(to_double(key, item));
  return out;
}

std::vector<std::string> KeyValueConfig::get_strings(const std::string &key) const {
  return split_list(get_string(key));
}

void KeyValueConfig::check_keys(const std::vector<std::string> &allowed) const {
  for (const auto &[k, v] : values_)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError(k, "unknown key '" + k + "'");
}

} // namespace addbo
