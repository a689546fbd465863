// SPDX-License-Identifier: Apache-2.0
// Private helpers around nlohmann::json.
#pragma once

#include <cmath>
#include <initializer_list>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"
#include "optbench/errors.hpp"

namespace optbench::detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::string_view where,
                                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + ": bad value for '" + key + "'");
  }
}

template <class T>
T get_required(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(std::string(where) + ": missing '" + key + "'");
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + ": bad value for '" + key + "'");
  }
}

/// JSON has no inf/nan; store them as strings.
inline json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline double to_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  if (j.is_null()) return NAN;
  throw ConfigError("expected a number, got " + j.dump());
}

}  // namespace optbench::detail
