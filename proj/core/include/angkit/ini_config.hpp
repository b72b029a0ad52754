#pragma once

#include <optional>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace angkit {

/// Ordered `key = value` entries under one `[section]` header.
struct IniSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(const std::string& key) const;
  void set(const std::string& key, std::string value);
};

/// Flat key/value text with sections. Keys before the first header live in a
/// section with an empty name. Comments start with ';' or '#'.
struct IniDocument {
  std::vector<IniSection> sections;

  static IniDocument parse(const std::string& text);
  std::string format() const;

  const IniSection* find(const std::string& name) const;
  IniSection& section(const std::string& name);
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Whitespace-separated tokens.
std::vector<std::string> split_words(const std::string& s);
/// Splits on a single delimiter character, keeping empty fields.
std::vector<std::string> split_on(const std::string& s, char delim);

/// Strict numeric conversions; throw ConfigError naming `what` on failure.
int parse_int(const std::string& s, const std::string& what);
long long parse_int64(const std::string& s, const std::string& what);
std::uint64_t parse_uint64(const std::string& s, const std::string& what);
double parse_double(const std::string& s, const std::string& what);

}  // namespace angkit
