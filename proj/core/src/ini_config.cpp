#include "angkit/ini_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "angkit/errors.hpp"

namespace angkit {

const std::string* IniSection::find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

void IniSection::set(const std::string& key, std::string value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries.emplace_back(key, std::move(value));
}

IniDocument IniDocument::parse(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  IniDocument doc;
  IniSection top;
  for (const auto& [key, child] : tree) {
    if (child.empty()) {
      top.entries.emplace_back(key, child.data());
      continue;
    }
    IniSection s;
    s.name = key;
    for (const auto& [k, v] : child) s.entries.emplace_back(k, v.data());
    doc.sections.push_back(std::move(s));
  }
  if (!top.entries.empty()) doc.sections.insert(doc.sections.begin(), std::move(top));
  return doc;
}

std::string IniDocument::format() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& s : sections) {
    if (!first) out << '\n';
    first = false;
    if (!s.name.empty()) out << '[' << s.name << "]\n";
    for (const auto& [k, v] : s.entries) out << k << " = " << v << '\n';
  }
  return out.str();
}

const IniSection* IniDocument::find(const std::string& name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

IniSection& IniDocument::section(const std::string& name) {
  for (auto& s : sections) {
    if (s.name == name) return s;
  }
  sections.push_back(IniSection{name, {}});
  return sections.back();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

namespace {

template <typename T>
T parse_number(const std::string& s, const std::string& what) {
  T value{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || s.empty())
    throw ConfigError("invalid " + what + ": '" + s + "'");
  return value;
}

}  // namespace

int parse_int(const std::string& s, const std::string& what) { return parse_number<int>(s, what); }
long long parse_int64(const std::string& s, const std::string& what) {
  return parse_number<long long>(s, what);
}
std::uint64_t parse_uint64(const std::string& s, const std::string& what) {
  return parse_number<std::uint64_t>(s, what);
}
double parse_double(const std::string& s, const std::string& what) {
  return parse_number<double>(s, what);
}

}  // namespace angkit
