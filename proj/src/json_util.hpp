#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "berrypick/errors.hpp"

namespace berrypick::detail {

using nlohmann::json;

inline void require_object(const json &j, std::string_view where) {
  if (!j.is_object())
    throw InputError(std::string(where) + ": expected a JSON object");
}

// Rejects keys outside `allowed`.
inline void check_keys(const json &j, std::initializer_list<std::string_view> allowed,
                       std::string_view where) {
  require_object(j, where);
  for (const auto &[key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InputError(std::string(where) + ": unknown key '" + key + "'");
}

template <typename T>
void read_opt(const json &j, const char *key, T &out, std::string_view where) {
  if (!j.contains(key))
    return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw InputError(std::string(where) + "." + key + ": " + e.what());
  }
}

template <typename T>
T read_req(const json &j, const char *key, std::string_view where) {
  if (!j.contains(key))
    throw InputError(std::string(where) + ": missing key '" + key + "'");
  T out{};
  read_opt(j, key, out, where);
  return out;
}

} // namespace berrypick::detail
