#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace addbo {

/// Invalid or missing configuration value; `key()` names the offending entry.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string &message)
      : std::runtime_error(message), key_(std::move(key)) {}
  const std::string &key() const { return key_; }

private:
  std::string key_;
};

/// Flat `key = value` text. Blank lines and `#` comments are ignored; list
/// values are comma separated.
class KeyValueConfig {
public:
  static KeyValueConfig parse(const std::string &text, const std::string &source = "<string>");
  static KeyValueConfig load(const std::string &path);

  bool has(const std::string &key) const { return values_.count(key) != 0; }
  void set(const std::string &key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string> &entries() const { return values_; }

  std::string get_string(const std::string &key) const;
  double get_double(const std::string &key) const;
  long get_int(const std::string &key) const;
  std::vector<double> get_doubles(const std::string &key) const;
  std::vector<std::string> get_strings(const std::string &key) const;

  /// Throws ConfigError for any key not in `allowed`.
  void check_keys(const std::vector<std::string> &allowed) const;

private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string &text);

} // namespace addbo
