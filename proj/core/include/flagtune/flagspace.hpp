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

// Flag search space: typed flag descriptions, full assignments of values to
// flags, and the bijection between assignments and points of the unit
// hypercube that every numerical stage works in.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace flagtune {

enum class FlagKind { boolean, integer, continuous, categorical };

// jvm: -XX:+Name / -XX:-Name / -XX:Name=value
// gnu: --name=value (booleans as true/false)
enum class RenderStyle { jvm, gnu };

std::string_view to_string(FlagKind kind) noexcept;
FlagKind flag_kind_from_string(std::string_view text);
std::string_view to_string(RenderStyle style) noexcept;
RenderStyle render_style_from_string(std::string_view text);

using FlagValue = std::variant<bool, std::int64_t, double, std::string>;

// Integers without a decimal point, doubles in shortest round-trip form.
std::string format_value(const FlagValue& value);

// Flags whose group is empty or "common" are always tunable.
inline constexpr std::string_view kCommonGroup = "common";

struct FlagSpec {
  std::string name;
  FlagKind kind = FlagKind::continuous;
  double lower = 0.0;  // continuous bounds
  double upper = 1.0;
  std::int64_t int_lower = 0;  // integer bounds
  std::int64_t int_upper = 0;
  std::vector<std::string> choices;  // categorical values
  FlagValue default_value = 0.0;
  std::string group;
  RenderStyle render_style = RenderStyle::jvm;

  static FlagSpec boolean(std::string name, bool fallback, std::string group = {});
  static FlagSpec integer(std::string name, std::int64_t lo, std::int64_t hi, std::int64_t fallback,
                          std::string group = {});
  static FlagSpec continuous(std::string name, double lo, double hi, double fallback,
                             std::string group = {});
  static FlagSpec categorical(std::string name, std::vector<std::string> choices,
                              std::string fallback, std::string group = {});

  // Throws Error(invalid_argument) when a range or default invariant is broken.
  void validate() const;
  bool contains(const FlagValue& value) const;

  bool operator==(const FlagSpec&) const = default;
};

class Configuration {
 public:
  using Map = std::map<std::string, FlagValue, std::less<>>;

  Configuration() = default;
  Configuration(std::initializer_list<Map::value_type> values) : values_(values) {}

  void set(std::string name, FlagValue value) { values_.insert_or_assign(std::move(name), std::move(value)); }
  const FlagValue* find(std::string_view name) const;
  const FlagValue& at(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  Map::const_iterator begin() const noexcept { return values_.begin(); }
  Map::const_iterator end() const noexcept { return values_.end(); }

  bool operator==(const Configuration&) const = default;

 private:
  Map values_;
};

class FlagSpace {
 public:
  FlagSpace() = default;
  // active_groups == nullopt activates every group.
  explicit FlagSpace(std::vector<FlagSpec> flags,
                     std::optional<std::set<std::string>> active_groups = std::nullopt);

  const std::vector<FlagSpec>& flags() const noexcept { return flags_; }
  const std::optional<std::set<std::string>>& active_groups() const noexcept { return active_groups_; }
  bool is_active(const FlagSpec& flag) const;

  // Encoding dimension: the number of active flags.
  std::size_t dimension() const noexcept { return active_.size(); }
  const FlagSpec& active_flag(std::size_t dim) const { return flags_[active_.at(dim)]; }
  std::vector<std::string> active_names() const;

  const FlagSpec* find(std::string_view name) const;
  std::optional<std::size_t> dimension_of(std::string_view name) const;

  // Every active flag at its default value.
  Configuration defaults() const;
  // Throws naming the first offending flag.
  void validate(const Configuration& config) const;

  FlagSpace with_active_groups(std::optional<std::set<std::string>> groups) const;
  // Keeps only the named flags, which must all be active; order follows this space.
  FlagSpace restricted_to(std::span<const std::string> names) const;

  // Stable identity of the active flag list, used to tie artifacts to a space.
  std::string fingerprint() const;

  bool operator==(const FlagSpace& other) const {
    return flags_ == other.flags_ && active_groups_ == other.active_groups_;
  }

 private:
  std::vector<FlagSpec> flags_;
  std::optional<std::set<std::string>> active_groups_;
  std::vector<std::size_t> active_;
};

// Unit-hypercube encoding of the active flags, in active-flag order.
std::vector<double> encode(const FlagSpace& space, const Configuration& config);
// Inverse of encode; integer and categorical dimensions round to the nearest value.
Configuration decode(const FlagSpace& space, std::span<const double> point);

// One argument per active flag present in config, in space order.
std::vector<std::string> render_cli_args(const FlagSpace& space, const Configuration& config);

// Ordered (regex, group) pairs; the first pattern found in a flag name wins.
using GroupRules = std::vector<std::pair<std::string, std::string>>;

struct FlagDumpParse {
  FlagSpace space;
  std::size_t skipped_lines = 0;  // malformed lines
};

// Parses `java -XX:+PrintFlagsFinal` output. String flags are dropped.
FlagDumpParse parse_flag_dump(std::string_view text, const GroupRules& rules = {});
// Emits the space back in flag-dump layout.
std::string serialize_flag_dump(const FlagSpace& space);

void to_json(nlohmann::json& out, const FlagSpec& flag);
void from_json(const nlohmann::json& in, FlagSpec& flag);
nlohmann::json flag_space_to_json(const FlagSpace& space);
FlagSpace flag_space_from_json(const nlohmann::json& doc);

}  // namespace flagtune
