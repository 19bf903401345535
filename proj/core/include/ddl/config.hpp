// Flat key=value configuration with [section] headers.
//
//   # comment
//   [problem]
//   preset = riemann
//   [sweep]
//   epsilons = 0.04, 0.02, 0.01
//
// Keys are addressed as "section.key". Values are kept as text and
// converted on access.
#ifndef DDL_CONFIG_HPP_
#define DDL_CONFIG_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ddl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config parse(std::string_view text, std::string_view origin = "<config>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<int> get_ints(const std::string& key, std::vector<int> fallback) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       std::vector<std::string> fallback) const;

  /// Throws ConfigError naming every key not in `known`.
  void require_known(const std::set<std::string>& known) const;

  /// Entries from `other` override entries here.
  void merge(const Config& other);

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Parses a real number ("inf" and "-inf" accepted); throws ConfigError.
double parse_real(std::string_view text, std::string_view what);

}  // namespace ddl

#endif  // DDL_CONFIG_HPP_
