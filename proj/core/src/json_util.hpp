#pragma once

// Private helpers shared by the JSON readers and writers in core/src.

#include <cmath>
#include <cstddef>
#include <istream>
#include <string>
#include <string_view>

#include "citerec/error.hpp"
#include "json.hpp"

namespace citerec::detail {

using nlohmann::json;

inline json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError,
                std::string(what) + ": malformed JSON (" + e.what() + ")");
  }
}

inline json parse_json_stream(std::istream& in, std::string_view what) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError,
                std::string(what) + ": malformed JSON (" + e.what() + ")");
  }
}

// Calls fn(record, line_number) for every non-blank line of a JSON Lines
// stream. Each record must be a JSON object.
template <typename Fn>
void for_each_jsonl(std::istream& in, std::string_view what, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::string where = std::string(what) + " line " + std::to_string(line_no);
    json record = parse_json(line, where);
    if (!record.is_object()) {
      throw Error(ErrorCode::kSchemaError, where + ": expected a JSON object");
    }
    fn(record, where);
  }
  if (in.bad()) {
    throw Error(ErrorCode::kIoError, std::string(what) + ": read failure");
  }
}

inline const json& require_field(const json& obj, const char* key,
                                 const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::kSchemaError,
                where + ": missing field \"" + key + "\"");
  }
  return *it;
}

inline std::string require_string(const json& obj, const char* key,
                                  const std::string& where) {
  const json& v = require_field(obj, key, where);
  if (!v.is_string()) {
    throw Error(ErrorCode::kSchemaError,
                where + ": field \"" + key + "\" must be a string");
  }
  return v.get<std::string>();
}

inline double require_number(const json& obj, const char* key,
                             const std::string& where) {
  const json& v = require_field(obj, key, where);
  if (!v.is_number()) {
    throw Error(ErrorCode::kSchemaError,
                where + ": field \"" + key + "\" must be a number");
  }
  return v.get<double>();
}

// Metric values are serialized with six decimals.
inline double round6(double x) { return std::round(x * 1e6) / 1e6; }

}  // namespace citerec::detail
