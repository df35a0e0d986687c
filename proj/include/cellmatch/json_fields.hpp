#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

namespace cellmatch {

using json = nlohmann::json;

/// Raised for malformed documents; the message names the offending field.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Reads keys out of a JSON object and rejects any it was not asked about.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw FormatError(path_, "expected an object");
  }

  std::string path_of(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) throw FormatError(path_of(key), "missing required field");
    return *it;
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw FormatError(path_of(key), "expected a number");
    return v.get<double>();
  }

  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  long integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw FormatError(path_of(key), "expected an integer");
    return v.get<long>();
  }

  long integer(const std::string& key, long fallback) { return has(key) ? integer(key) : fallback; }

  unsigned long long unsigned_integer(const std::string& key, unsigned long long fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw FormatError(path_of(key), "expected a non-negative integer");
    return v.get<unsigned long long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw FormatError(path_of(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw FormatError(path_of(key), "expected a string");
    return v.get<std::string>();
  }

  std::pair<double, double> range(const std::string& key, std::pair<double, double> fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw FormatError(path_of(key), "expected [min, max]");
    std::pair<double, double> r{v[0].get<double>(), v[1].get<double>()};
    if (!(r.first <= r.second)) throw FormatError(path_of(key), "range min exceeds max");
    return r;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw FormatError(path_of(it.key()), "unknown key");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

// Line number (1-based) of a byte offset, for parse diagnostics.
inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t k = 0; k < text.size() && k < byte; ++k)
    if (text[k] == '\n') ++line;
  return line;
}

inline json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("", "parse error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
}

}  // namespace cellmatch
