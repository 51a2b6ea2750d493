#pragma once

// JSON zero-table cache: one top-level object keyed "r:i" mapping to the
// descending zero array of that entry. Doubles round-trip bit-exactly through
// the shortest-representation serializer.

#include <json.hpp>

#include <charconv>
#include <string>

#include "ecr/zero_table.hpp"

namespace ecr {

template <typename Scalar>
nlohmann::json zero_table_to_json(const ZeroTable<Scalar>& table) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, zeros] : table.entries()) {
    const std::string name = std::to_string(key.first) + ":" + std::to_string(key.second);
    nlohmann::json arr = nlohmann::json::array();
    for (Index v = 0; v < zeros.size(); ++v) arr.push_back(static_cast<double>(zeros[v]));
    j[name] = std::move(arr);
  }
  return j;
}

template <typename Scalar>
ZeroTable<Scalar> zero_table_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw std::invalid_argument("zero table file: top level must be an object");
  int levels = 0;
  Index max_i = 0;
  std::map<std::pair<int, Index>, Vector<Scalar>> parsed;
  for (const auto& [name, arr] : j.items()) {
    const auto colon = name.find(':');
    int r = -1;
    long long i = -1;
    auto bad = [&] {
      throw std::invalid_argument("zero table file: bad key '" + name + "'");
    };
    if (colon == std::string::npos) bad();
    auto res1 = std::from_chars(name.data(), name.data() + colon, r);
    auto res2 =
        std::from_chars(name.data() + colon + 1, name.data() + name.size(), i);
    if (res1.ec != std::errc() || res2.ec != std::errc() || r < 0 || i < 1) bad();
    if (!arr.is_array())
      throw std::invalid_argument("zero table file: entry '" + name + "' not an array");
    Vector<Scalar> zeros(static_cast<Index>(arr.size()));
    for (Index v = 0; v < zeros.size(); ++v)
      zeros[v] = static_cast<Scalar>(
          arr[static_cast<std::size_t>(v)].template get<double>());
    for (Index v = 0; v + 1 < zeros.size(); ++v)
      if (!(zeros[v] > zeros[v + 1]))
        throw std::invalid_argument("zero table file: entry '" + name +
                                    "' not strictly descending");
    levels = std::max(levels, r + 1);
    max_i = std::max<Index>(max_i, i);
    parsed[{r, static_cast<Index>(i)}] = std::move(zeros);
  }
  const Index n = (Index(1) << levels) - 1;
  if (max_i > n)
    throw std::invalid_argument("zero table file: index exceeds grid for level count");
  ZeroTable<Scalar> table(levels, n);
  for (auto& [key, zeros] : parsed) table.set(key.first, key.second, std::move(zeros));
  return table;
}

}  // namespace ecr
