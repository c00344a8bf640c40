#include "elspot/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "elspot/errors.hpp"

namespace elspot::toml {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ValidationError("config line " + std::to_string(line) + ": " + what);
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Remove a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

Value parse_scalar(const std::string& tok, int line) {
  if (tok.empty()) fail(line, "empty value");
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"') fail(line, "unterminated string");
    return Value{tok.substr(1, tok.size() - 2)};
  }
  if (tok == "true") return Value{true};
  if (tok == "false") return Value{false};
  char* end = nullptr;
  const double num = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    fail(line, "cannot parse value '" + tok + "'");
  return Value{num};
}

std::vector<std::string> split_top_level(const std::string& body, int line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_str = false;
  for (char c : body) {
    if (c == '"') in_str = !in_str;
    if (c == ',' && !in_str) {
      out.push_back(strip(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  const std::string last = strip(cur);
  if (!last.empty()) out.push_back(last);
  if (in_str) fail(line, "unterminated string in array");
  return out;
}

Value parse_value(const std::string& tok, int line) {
  if (!tok.empty() && tok.front() == '[') {
    if (tok.back() != ']') fail(line, "unterminated array");
    Array arr;
    for (const auto& item : split_top_level(tok.substr(1, tok.size() - 2), line))
      arr.push_back(parse_scalar(item, line));
    return Value{arr};
  }
  return parse_scalar(tok, line);
}

}  // namespace

const std::string& Value::as_string() const {
  if (!is_string()) throw ValidationError("config value is not a string");
  return std::get<std::string>(v);
}
double Value::as_number() const {
  if (!is_number()) throw ValidationError("config value is not a number");
  return std::get<double>(v);
}
bool Value::as_bool() const {
  if (!is_bool()) throw ValidationError("config value is not a boolean");
  return std::get<bool>(v);
}
const Array& Value::as_array() const {
  if (!is_array()) throw ValidationError("config value is not an array");
  return std::get<Array>(v);
}

const Value& Table::at(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end()) throw ValidationError("config: missing key '" + key + "'");
  return it->second;
}
std::string Table::get_string(const std::string& key) const { return at(key).as_string(); }
double Table::get_number(const std::string& key) const { return at(key).as_number(); }
bool Table::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? at(key).as_bool() : fallback;
}
double Table::get_number_or(const std::string& key, double fallback) const {
  return has(key) ? at(key).as_number() : fallback;
}
std::string Table::get_string_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? at(key).as_string() : fallback;
}
std::vector<std::string> Table::get_string_array(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& v : at(key).as_array()) out.push_back(v.as_string());
  return out;
}
std::vector<double> Table::get_number_array(const std::string& key) const {
  std::vector<double> out;
  for (const auto& v : at(key).as_array()) out.push_back(v.as_number());
  return out;
}

Table parse(const std::string& text) {
  Table root;
  Table* current = &root;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = strip(strip_comment(raw));
    if (s.empty()) continue;
    if (s.rfind("[[", 0) == 0) {
      if (s.size() < 5 || s.substr(s.size() - 2) != "]]")
        fail(line, "malformed table-array header");
      const std::string name = strip(s.substr(2, s.size() - 4));
      if (name.empty()) fail(line, "empty table-array name");
      root.table_arrays[name].emplace_back();
      current = &root.table_arrays[name].back();
      continue;
    }
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed table header");
      const std::string name = strip(s.substr(1, s.size() - 2));
      if (name.empty()) fail(line, "empty table name");
      current = &root.tables[name];
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = strip(s.substr(0, eq));
    const std::string val = strip(s.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (current->entries.count(key)) fail(line, "duplicate key '" + key + "'");
    current->entries[key] = parse_value(val, line);
  }
  return root;
}

Table parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace elspot::toml
