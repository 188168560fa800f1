#include "hcsim/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hcsim {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("not a number for " + what + ": '" + text + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& text, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("not an integer for " + what + ": '" + text + "'");
  }
  return v;
}

KvFile KvFile::parse(std::istream& in, const std::string& origin) {
  KvFile out;
  out.origin_ = origin;
  std::string line;
  std::string current_section;
  std::size_t current_index = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header");
      }
      current_section = trim(text.substr(1, text.size() - 2));
      current_index = ++out.section_count_;
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    Entry e;
    e.section_index = current_index;
    e.section = current_section;
    e.key = trim(text.substr(0, eq));
    e.value = trim(text.substr(eq + 1));
    if (e.key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    out.entries_.push_back(std::move(e));
  }
  return out;
}

KvFile KvFile::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  return parse(in, path.string());
}

std::optional<std::string> KvFile::get(const std::string& section, const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.section == section && e.key == key) return e.value;
  }
  return std::nullopt;
}

std::string KvFile::require(const std::string& section, const std::string& key) const {
  auto v = get(section, key);
  if (!v) {
    const std::string where = section.empty() ? key : "[" + section + "] " + key;
    throw ConfigError(origin_ + ": missing required key " + where);
  }
  return *v;
}

double KvFile::require_double(const std::string& section, const std::string& key) const {
  return parse_double(require(section, key), key);
}

std::int64_t KvFile::require_int(const std::string& section, const std::string& key) const {
  return parse_int(require(section, key), key);
}

std::uint64_t KvFile::require_u64(const std::string& section, const std::string& key) const {
  const auto v = require_int(section, key);
  if (v < 0) throw ConfigError(key + " must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

double KvFile::get_double(const std::string& section, const std::string& key, double fallback) const {
  auto v = get(section, key);
  return v ? parse_double(*v, key) : fallback;
}

std::int64_t KvFile::get_int(const std::string& section, const std::string& key, std::int64_t fallback) const {
  auto v = get(section, key);
  return v ? parse_int(*v, key) : fallback;
}

std::vector<std::string> KvFile::get_list(const std::string& section, const std::string& key) const {
  std::vector<std::string> out;
  auto v = get(section, key);
  if (!v) return out;
  std::istringstream ss(*v);
  std::string item;
  while (ss >> item) out.push_back(item);
  return out;
}

std::vector<std::size_t> KvFile::section_occurrences(const std::string& section) const {
  std::vector<std::size_t> out;
  for (const auto& e : entries_) {
    if (e.section == section && (out.empty() || out.back() != e.section_index)) {
      out.push_back(e.section_index);
    }
  }
  return out;
}

std::optional<std::string> KvFile::get_at(std::size_t section_index, const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.section_index == section_index && e.key == key) return e.value;
  }
  return std::nullopt;
}

std::string KvFile::require_at(std::size_t section_index, const std::string& key) const {
  auto v = get_at(section_index, key);
  if (!v) throw ConfigError(origin_ + ": missing key '" + key + "' in section occurrence");
  return *v;
}

double KvFile::require_double_at(std::size_t section_index, const std::string& key) const {
  return parse_double(require_at(section_index, key), key);
}

}  // namespace hcsim
