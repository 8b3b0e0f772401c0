#include "iat/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace iat {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config: malformed section header at line " +
                                 std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw std::runtime_error("config: empty section name at line " + std::to_string(lineno));
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key = value at line " + std::to_string(lineno));
    if (section.empty())
      throw std::runtime_error("config: key outside any section at line " +
                               std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
    auto& sec = cfg.sections_[section];
    if (sec.count(key))
      throw std::runtime_error("config: duplicate key '" + section + "." + key + "'");
    sec[key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto sec = sections_.find(section);
  return sec != sections_.end() && sec->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key) const {
  const auto sec = sections_.find(section);
  if (sec == sections_.end() || !sec->second.count(key))
    throw std::runtime_error("config: missing required key '" + section + "." + key + "'");
  return sec->second.at(key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  if (!has(section, key)) return fallback;
  return get(section, key);
}

double Config::get_double(const std::string& section, const std::string& key) const {
  return std::stod(get(section, key));
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
  if (!has(section, key)) return fallback;
  return std::stod(get(section, key));
}

int Config::get_int_or(const std::string& section, const std::string& key, int fallback) const {
  if (!has(section, key)) return fallback;
  return std::stoi(get(section, key));
}

std::uint64_t Config::get_u64_or(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  return std::stoull(get(section, key));
}

bool Config::get_bool_or(const std::string& section, const std::string& key,
                         bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config: '" + section + "." + key + "' is not a boolean: " + v);
}

std::vector<std::string> Config::get_list_or(const std::string& section, const std::string& key,
                                             const std::vector<std::string>& fallback) const {
  if (!has(section, key)) return fallback;
  return split_list(get(section, key));
}

std::vector<double> Config::get_doubles_or(const std::string& section, const std::string& key,
                                           const std::vector<double>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<double> out;
  for (const auto& s : split_list(get(section, key))) out.push_back(std::stod(s));
  return out;
}

std::vector<int> Config::get_ints_or(const std::string& section, const std::string& key,
                                     const std::vector<int>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<int> out;
  for (const auto& s : split_list(get(section, key))) out.push_back(std::stoi(s));
  return out;
}

std::vector<std::size_t> Config::get_sizes_or(const std::string& section, const std::string& key,
                                              const std::vector<std::size_t>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<std::size_t> out;
  for (const auto& s : split_list(get(section, key)))
    out.push_back(static_cast<std::size_t>(std::stoull(s)));
  return out;
}

bool Config::has_section(const std::string& section) const {
  return sections_.count(section) > 0;
}

std::vector<std::pair<std::string, std::string>> Config::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, keys] : sections_)
    for (const auto& [key, _] : keys) out.emplace_back(name, key);
  return out;
}

void Config::require_known(const std::map<std::string, std::set<std::string>>& schema) const {
  for (const auto& [name, keys] : sections_) {
    const auto sec = schema.find(name);
    if (sec == schema.end())
      throw std::runtime_error("config: unknown section [" + name + "]");
    for (const auto& [key, _] : keys)
      if (!sec->second.count(key))
        throw std::runtime_error("config: unknown key '" + name + "." + key + "'");
  }
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text_) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace iat
