#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcsim {

// Raised for malformed config/anchor files or dangling path references.
// The CLI maps it to exit code 4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Line-oriented "key = value" file with repeatable [section] headers.
// Entries keep file order; sections may repeat (each [task] block in an
// instance file is one section occurrence).
class KvFile {
 public:
  struct Entry {
    std::size_t section_index = 0;  // 0 = before any [section] header
    std::string section;            // "" for the top-level scope
    std::string key;
    std::string value;
  };

  static KvFile parse(std::istream& in, const std::string& origin = "<stream>");
  static KvFile parse_file(const std::filesystem::path& path);

  // First value of key in the first occurrence of section ("" = top level).
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string require(const std::string& section, const std::string& key) const;

  double require_double(const std::string& section, const std::string& key) const;
  std::int64_t require_int(const std::string& section, const std::string& key) const;
  std::uint64_t require_u64(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) const;

  // Whitespace-separated list value.
  std::vector<std::string> get_list(const std::string& section, const std::string& key) const;

  // Indices of every occurrence of a section, in file order.
  std::vector<std::size_t> section_occurrences(const std::string& section) const;
  std::optional<std::string> get_at(std::size_t section_index, const std::string& key) const;
  std::string require_at(std::size_t section_index, const std::string& key) const;
  double require_double_at(std::size_t section_index, const std::string& key) const;

  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }

 private:
  std::vector<Entry> entries_;
  std::string origin_;
  std::size_t section_count_ = 0;
};

double parse_double(const std::string& text, const std::string& what);
std::int64_t parse_int(const std::string& text, const std::string& what);

}  // namespace hcsim
