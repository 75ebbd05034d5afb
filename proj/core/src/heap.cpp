// Copyright 2026 The flagtune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flagtune/heap.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "flagtune/error.hpp"

namespace flagtune {
namespace {

constexpr std::array<std::string_view, 8> kColumns = {"S0C", "S1C", "EC", "OC", "S0U", "S1U", "EU", "OU"};

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::optional<double> number(const std::string& token) {
  double v = 0;
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || end != token.data() + token.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

double heap_usage_sample(const HeapSample& s) {
  const double capacity = s.s0c + s.s1c + s.ec + s.oc;
  if (!(capacity > 0.0)) fail(ErrorKind::numerical, "heap sample has zero total capacity");
  return (s.s0u + s.s1u + s.eu + s.ou) / capacity * 100.0;
}

double aggregate_heap(std::span<const double> usage) {
  require(!usage.empty(), "aggregate_heap: no samples");
  return std::accumulate(usage.begin(), usage.end(), 0.0) / static_cast<double>(usage.size());
}

JstatParse parse_jstat_stream(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) header = tokens_of(line);
  if (header.empty()) fail(ErrorKind::parse, "jstat stream is empty");

  std::array<std::size_t, kColumns.size()> position{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) fail(ErrorKind::parse, "missing column " + std::string(kColumns[c]));
    position[c] = static_cast<std::size_t>(it - header.begin());
  }

  JstatParse result;
  while (std::getline(in, line)) {
    const auto row = tokens_of(line);
    if (row.empty() || row == header) continue;
    std::array<double, kColumns.size()> v{};
    bool ok = row.size() == header.size();
    for (std::size_t c = 0; ok && c < kColumns.size(); ++c) {
      auto parsed = number(row[position[c]]);
      ok = parsed.has_value() && *parsed >= 0.0;
      if (ok) v[c] = *parsed;
    }
    if (!ok) {
      ++result.skipped_rows;
      continue;
    }
    result.samples.push_back(HeapSample{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
  }
  return result;
}

}  // namespace flagtune
