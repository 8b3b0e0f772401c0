#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace iat {

/// Flat, line-oriented `key = value` configuration with [section] headers.
/// '#' and ';' start comments. Duplicate keys are errors, and consumers call
/// require_all_consumed() so that unknown (typo'd) keys are errors too.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;

  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;

  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key, double fallback) const;
  int get_int_or(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;

  std::vector<std::string> get_list_or(const std::string& section, const std::string& key,
                                       const std::vector<std::string>& fallback) const;
  std::vector<double> get_doubles_or(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const;
  std::vector<int> get_ints_or(const std::string& section, const std::string& key,
                               const std::vector<int>& fallback) const;
  std::vector<std::size_t> get_sizes_or(const std::string& section, const std::string& key,
                                        const std::vector<std::size_t>& fallback) const;

  bool has_section(const std::string& section) const;
  /// Every (section, key) pair in file order within sorted sections.
  std::vector<std::pair<std::string, std::string>> entries() const;
  /// Throws on any section or key outside the schema (anti-typo guard).
  void require_known(const std::map<std::string, std::set<std::string>>& schema) const;

  /// Original text, used for config echoes and hashing.
  const std::string& text() const { return text_; }
  /// FNV-1a over the original text.
  std::uint64_t hash() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string text_;
};

}  // namespace iat
