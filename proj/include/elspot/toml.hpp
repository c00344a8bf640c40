#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace elspot::toml {

// Minimal TOML subset used for declarative configs: top-level keys, [table]
// sections, [[array-of-table]] entries, strings, numbers, booleans, and flat
// arrays of scalars. Errors carry the offending line and key.
struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<std::monostate, bool, double, std::string, Array> v;

  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_number() const { return std::holds_alternative<double>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_array() const { return std::holds_alternative<Array>(v); }

  const std::string& as_string() const;
  double as_number() const;
  bool as_bool() const;
  const Array& as_array() const;
};

struct Table {
  std::map<std::string, Value> entries;
  // [[name]] groups, in file order.
  std::map<std::string, std::vector<Table>> table_arrays;
  std::map<std::string, Table> tables;

  bool has(const std::string& key) const { return entries.count(key) > 0; }
  const Value& at(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  double get_number(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  double get_number_or(const std::string& key, double fallback) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  std::vector<std::string> get_string_array(const std::string& key) const;
  std::vector<double> get_number_array(const std::string& key) const;
};

Table parse(const std::string& text);
Table parse_file(const std::string& path);

}  // namespace elspot::toml
