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

#include "flagtune/flagspace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flagtune/error.hpp"

namespace flagtune {
namespace {

constexpr std::int64_t kInt64Max = std::numeric_limits<std::int64_t>::max();

std::string shortest(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

bool is_common(const std::string& group) { return group.empty() || group == kCommonGroup; }

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::string_view to_string(FlagKind kind) noexcept {
  switch (kind) {
    case FlagKind::boolean: return "boolean";
    case FlagKind::integer: return "integer";
    case FlagKind::continuous: return "continuous";
    case FlagKind::categorical: return "categorical";
  }
  return "?";
}

FlagKind flag_kind_from_string(std::string_view text) {
  if (text == "boolean" || text == "bool") return FlagKind::boolean;
  if (text == "integer" || text == "int") return FlagKind::integer;
  if (text == "continuous" || text == "double") return FlagKind::continuous;
  if (text == "categorical") return FlagKind::categorical;
  fail(ErrorKind::parse, "unknown flag kind '" + std::string(text) + "'");
}

std::string_view to_string(RenderStyle style) noexcept {
  return style == RenderStyle::jvm ? "jvm" : "gnu";
}

RenderStyle render_style_from_string(std::string_view text) {
  if (text == "jvm") return RenderStyle::jvm;
  if (text == "gnu") return RenderStyle::gnu;
  fail(ErrorKind::parse, "unknown render style '" + std::string(text) + "'");
}

std::string format_value(const FlagValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return shortest(v);
        } else {
          return v;
        }
      },
      value);
}

// ---------------------------------------------------------------------------
// FlagSpec

FlagSpec FlagSpec::boolean(std::string name, bool fallback, std::string group) {
  FlagSpec f;
  f.name = std::move(name);
  f.kind = FlagKind::boolean;
  f.default_value = fallback;
  f.group = std::move(group);
  return f;
}

FlagSpec FlagSpec::integer(std::string name, std::int64_t lo, std::int64_t hi,
                           std::int64_t fallback, std::string group) {
  FlagSpec f;
  f.name = std::move(name);
  f.kind = FlagKind::integer;
  f.int_lower = lo;
  f.int_upper = hi;
  f.default_value = fallback;
  f.group = std::move(group);
  f.validate();
  return f;
}

FlagSpec FlagSpec::continuous(std::string name, double lo, double hi, double fallback,
                              std::string group) {
  FlagSpec f;
  f.name = std::move(name);
  f.kind = FlagKind::continuous;
  f.lower = lo;
  f.upper = hi;
  f.default_value = fallback;
  f.group = std::move(group);
  f.validate();
  return f;
}

FlagSpec FlagSpec::categorical(std::string name, std::vector<std::string> choices,
                               std::string fallback, std::string group) {
  FlagSpec f;
  f.name = std::move(name);
  f.kind = FlagKind::categorical;
  f.choices = std::move(choices);
  f.default_value = std::move(fallback);
  f.group = std::move(group);
  f.validate();
  return f;
}

void FlagSpec::validate() const {
  require(!name.empty(), "flag with empty name");
  switch (kind) {
    case FlagKind::boolean:
      require(std::holds_alternative<bool>(default_value), "flag " + name + ": default must be boolean");
      break;
    case FlagKind::integer:
      require(int_lower <= int_upper, "flag " + name + ": integer range requires lo <= hi");
      require(std::holds_alternative<std::int64_t>(default_value),
              "flag " + name + ": default must be an integer");
      break;
    case FlagKind::continuous:
      require(std::isfinite(lower) && std::isfinite(upper) && lower < upper,
              "flag " + name + ": continuous range requires finite lo < hi");
      require(std::holds_alternative<double>(default_value),
              "flag " + name + ": default must be a real number");
      break;
    case FlagKind::categorical:
      require(!choices.empty(), "flag " + name + ": categorical flag needs at least one value");
      require(std::holds_alternative<std::string>(default_value),
              "flag " + name + ": default must be one of the listed values");
      break;
  }
  require(contains(default_value), "flag " + name + ": default " + format_value(default_value) +
                                       " outside its range");
}

bool FlagSpec::contains(const FlagValue& value) const {
  switch (kind) {
    case FlagKind::boolean:
      return std::holds_alternative<bool>(value);
    case FlagKind::integer: {
      const auto* v = std::get_if<std::int64_t>(&value);
      return v != nullptr && *v >= int_lower && *v <= int_upper;
    }
    case FlagKind::continuous: {
      const auto* v = std::get_if<double>(&value);
      return v != nullptr && *v >= lower && *v <= upper;
    }
    case FlagKind::categorical: {
      const auto* v = std::get_if<std::string>(&value);
      return v != nullptr && std::find(choices.begin(), choices.end(), *v) != choices.end();
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Configuration

const FlagValue* Configuration::find(std::string_view name) const {
  auto it = values_.find(name);
  return it == values_.end() ? nullptr : &it->second;
}

const FlagValue& Configuration::at(std::string_view name) const {
  const auto* v = find(name);
  if (v == nullptr) fail(ErrorKind::invalid_argument, "configuration has no value for " + std::string(name));
  return *v;
}

// ---------------------------------------------------------------------------
// FlagSpace

FlagSpace::FlagSpace(std::vector<FlagSpec> flags, std::optional<std::set<std::string>> active_groups)
    : flags_(std::move(flags)), active_groups_(std::move(active_groups)) {
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < flags_.size(); ++i) {
    flags_[i].validate();
    require(seen.insert(flags_[i].name).second, "duplicate flag name " + flags_[i].name);
    if (is_active(flags_[i])) active_.push_back(i);
  }
}

bool FlagSpace::is_active(const FlagSpec& flag) const {
  if (is_common(flag.group) || !active_groups_) return true;
  return active_groups_->count(flag.group) > 0;
}

std::vector<std::string> FlagSpace::active_names() const {
  std::vector<std::string> names;
  names.reserve(active_.size());
  for (auto i : active_) names.push_back(flags_[i].name);
  return names;
}

const FlagSpec* FlagSpace::find(std::string_view name) const {
  for (const auto& f : flags_)
    if (f.name == name) return &f;
  return nullptr;
}

std::optional<std::size_t> FlagSpace::dimension_of(std::string_view name) const {
  for (std::size_t d = 0; d < active_.size(); ++d)
    if (flags_[active_[d]].name == name) return d;
  return std::nullopt;
}

Configuration FlagSpace::defaults() const {
  Configuration config;
  for (auto i : active_) config.set(flags_[i].name, flags_[i].default_value);
  return config;
}

void FlagSpace::validate(const Configuration& config) const {
  for (const auto& [name, value] : config) {
    const auto* flag = find(name);
    require(flag != nullptr, "unknown flag " + name);
    require(flag->contains(value), "flag " + name + ": value " + format_value(value) + " out of range");
  }
  for (auto i : active_)
    require(config.contains(flags_[i].name), "flag " + flags_[i].name + ": missing assignment");
}

FlagSpace FlagSpace::with_active_groups(std::optional<std::set<std::string>> groups) const {
  return FlagSpace(flags_, std::move(groups));
}

FlagSpace FlagSpace::restricted_to(std::span<const std::string> names) const {
  std::set<std::string_view> wanted(names.begin(), names.end());
  std::vector<FlagSpec> kept;
  for (auto i : active_)
    if (wanted.erase(flags_[i].name) > 0) kept.push_back(flags_[i]);
  require(wanted.empty(), "flag " + std::string(wanted.empty() ? "" : *wanted.begin()) +
                              " is not an active flag of this space");
  return FlagSpace(std::move(kept), std::nullopt);
}

std::string FlagSpace::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  for (auto i : active_) {
    mix(flags_[i].name);
    mix(to_string(flags_[i].kind));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// encode / decode / render

std::vector<double> encode(const FlagSpace& space, const Configuration& config) {
  std::vector<double> point(space.dimension());
  for (std::size_t d = 0; d < space.dimension(); ++d) {
    const auto& flag = space.active_flag(d);
    const auto* value = config.find(flag.name);
    require(value != nullptr, "flag " + flag.name + ": missing assignment");
    require(flag.contains(*value), "flag " + flag.name + ": value " + format_value(*value) + " out of range");
    switch (flag.kind) {
      case FlagKind::boolean:
        point[d] = std::get<bool>(*value) ? 1.0 : 0.0;
        break;
      case FlagKind::integer: {
        const auto span = static_cast<double>(flag.int_upper - flag.int_lower);
        point[d] = span == 0.0 ? 0.0 : static_cast<double>(std::get<std::int64_t>(*value) - flag.int_lower) / span;
        break;
      }
      case FlagKind::continuous:
        point[d] = (std::get<double>(*value) - flag.lower) / (flag.upper - flag.lower);
        break;
      case FlagKind::categorical: {
        const auto& v = std::get<std::string>(*value);
        const auto index = std::find(flag.choices.begin(), flag.choices.end(), v) - flag.choices.begin();
        point[d] = flag.choices.size() < 2 ? 0.0
                                           : static_cast<double>(index) / static_cast<double>(flag.choices.size() - 1);
        break;
      }
    }
  }
  return point;
}

Configuration decode(const FlagSpace& space, std::span<const double> point) {
  require(point.size() == space.dimension(), "decode: expected " + std::to_string(space.dimension()) +
                                                 " components, got " + std::to_string(point.size()));
  Configuration config;
  for (std::size_t d = 0; d < point.size(); ++d) {
    const auto& flag = space.active_flag(d);
    const double u = point[d];
    require(u >= 0.0 && u <= 1.0, "decode: component " + std::to_string(d) + " (" + flag.name +
                                      ") outside [0,1]");
    switch (flag.kind) {
      case FlagKind::boolean:
        config.set(flag.name, u >= 0.5);
        break;
      case FlagKind::integer: {
        const auto span = static_cast<long double>(flag.int_upper - flag.int_lower);
        auto offset = static_cast<std::int64_t>(std::llroundl(static_cast<long double>(u) * span));
        offset = std::clamp<std::int64_t>(offset, 0, flag.int_upper - flag.int_lower);
        config.set(flag.name, flag.int_lower + offset);
        break;
      }
      case FlagKind::continuous: {
        double v = u == 1.0 ? flag.upper : flag.lower + u * (flag.upper - flag.lower);
        config.set(flag.name, std::clamp(v, flag.lower, flag.upper));
        break;
      }
      case FlagKind::categorical: {
        const auto last = flag.choices.size() - 1;
        auto index = static_cast<std::size_t>(std::llround(u * static_cast<double>(last)));
        config.set(flag.name, flag.choices[std::min(index, last)]);
        break;
      }
    }
  }
  return config;
}

std::vector<std::string> render_cli_args(const FlagSpace& space, const Configuration& config) {
  std::vector<std::string> args;
  for (std::size_t d = 0; d < space.dimension(); ++d) {
    const auto& flag = space.active_flag(d);
    const auto* value = config.find(flag.name);
    if (value == nullptr) continue;
    if (flag.render_style == RenderStyle::gnu) {
      args.push_back("--" + flag.name + "=" + format_value(*value));
    } else if (const auto* b = std::get_if<bool>(value)) {
      args.push_back(std::string(*b ? "-XX:+" : "-XX:-") + flag.name);
    } else {
      args.push_back("-XX:" + flag.name + "=" + format_value(*value));
    }
  }
  return args;
}

// ---------------------------------------------------------------------------
// Flag dump

FlagDumpParse parse_flag_dump(std::string_view text, const GroupRules& rules) {
  std::vector<std::pair<std::regex, std::string>> compiled;
  for (const auto& [pattern, group] : rules) compiled.emplace_back(std::regex(pattern), group);
  auto group_of = [&](const std::string& name) -> std::string {
    for (const auto& [re, group] : compiled)
      if (std::regex_search(name, re)) return group;
    return std::string(kCommonGroup);
  };

  std::vector<FlagSpec> flags;
  std::set<std::string> seen;
  std::size_t skipped = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '[') continue;
    if (tokens.size() < 4 || (tokens[2] != "=" && tokens[2] != ":=")) {
      ++skipped;
      continue;
    }
    const std::string type(tokens[0]);
    const std::string name(tokens[1]);
    const std::string_view raw = tokens[3];
    if (type == "ccstr" || type == "ccstrlist") continue;
    if (!seen.insert(name).second) {
      ++skipped;
      continue;
    }

    if (type == "bool") {
      if (raw != "true" && raw != "false") {
        ++skipped;
        continue;
      }
      flags.push_back(FlagSpec::boolean(name, raw == "true", group_of(name)));
    } else if (type == "intx" || type == "uintx" || type == "uint64_t" || type == "size_t" ||
               type == "int" || type == "uint") {
      // Defaults beyond int64 saturate; the range heuristic is [0, 2*default].
      long double parsed = 0;
      try {
        std::size_t used = 0;
        parsed = std::stold(std::string(raw), &used);
        if (used != raw.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        ++skipped;
        continue;
      }
      const long double max = static_cast<long double>(kInt64Max);
      const auto fallback = static_cast<std::int64_t>(std::clamp(parsed, -max, max));
      std::int64_t lo = 0, hi = 1;
      if (fallback > 0) {
        hi = fallback > kInt64Max / 2 ? kInt64Max : 2 * fallback;
      } else if (fallback < 0) {
        lo = fallback < -(kInt64Max / 2) ? -kInt64Max : 2 * fallback;
        hi = 0;
      }
      flags.push_back(FlagSpec::integer(name, lo, hi, fallback, group_of(name)));
    } else if (type == "double") {
      double fallback = 0;
      auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), fallback);
      if (ec != std::errc{} || end != raw.data() + raw.size() || !std::isfinite(fallback)) {
        ++skipped;
        continue;
      }
      double lo = 0.0, hi = 1.0;
      if (fallback > 0) {
        hi = 2.0 * fallback;
      } else if (fallback < 0) {
        lo = 2.0 * fallback;
        hi = 0.0;
      }
      flags.push_back(FlagSpec::continuous(name, lo, hi, fallback, group_of(name)));
    } else {
      ++skipped;
    }
  }
  if (flags.empty()) fail(ErrorKind::parse, "no flags parsed");
  return {FlagSpace(std::move(flags)), skipped};
}

std::string serialize_flag_dump(const FlagSpace& space) {
  std::ostringstream out;
  out << "[Global flags]\n";
  for (const auto& flag : space.flags()) {
    std::string type;
    switch (flag.kind) {
      case FlagKind::boolean: type = "bool"; break;
      case FlagKind::integer: type = "intx"; break;
      case FlagKind::continuous: type = "double"; break;
      case FlagKind::categorical: continue;  // no dump representation
    }
    out << "    " << type << ' ' << flag.name << " = " << format_value(flag.default_value)
        << " {product}\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json value_to_json(const FlagValue& value) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, value);
}

FlagValue value_from_json(const nlohmann::json& j, FlagKind kind, const std::string& name) {
  switch (kind) {
    case FlagKind::boolean:
      require(j.is_boolean(), "flag " + name + ": default must be boolean");
      return j.get<bool>();
    case FlagKind::integer:
      require(j.is_number_integer(), "flag " + name + ": default must be an integer");
      return j.get<std::int64_t>();
    case FlagKind::continuous:
      require(j.is_number(), "flag " + name + ": default must be a number");
      return j.get<double>();
    case FlagKind::categorical:
      require(j.is_string(), "flag " + name + ": default must be a string");
      return j.get<std::string>();
  }
  return {};
}

}  // namespace

void to_json(nlohmann::json& out, const FlagSpec& flag) {
  out = nlohmann::json::object();
  out["name"] = flag.name;
  out["kind"] = to_string(flag.kind);
  switch (flag.kind) {
    case FlagKind::boolean: break;
    case FlagKind::integer: out["range"] = {flag.int_lower, flag.int_upper}; break;
    case FlagKind::continuous: out["range"] = {flag.lower, flag.upper}; break;
    case FlagKind::categorical: out["range"] = flag.choices; break;
  }
  out["default"] = value_to_json(flag.default_value);
  if (!flag.group.empty()) out["group"] = flag.group;
  if (flag.render_style != RenderStyle::jvm) out["render"] = to_string(flag.render_style);
}

void from_json(const nlohmann::json& in, FlagSpec& flag) {
  require(in.is_object() && in.contains("name") && in.contains("kind"),
          "flag entries need at least name and kind");
  flag = FlagSpec{};
  flag.name = in.at("name").get<std::string>();
  flag.kind = flag_kind_from_string(in.at("kind").get<std::string>());
  if (in.contains("range")) {
    const auto& r = in.at("range");
    switch (flag.kind) {
      case FlagKind::boolean: break;
      case FlagKind::integer:
        require(r.is_array() && r.size() == 2, "flag " + flag.name + ": range must be [lo, hi]");
        flag.int_lower = r[0].get<std::int64_t>();
        flag.int_upper = r[1].get<std::int64_t>();
        break;
      case FlagKind::continuous:
        require(r.is_array() && r.size() == 2, "flag " + flag.name + ": range must be [lo, hi]");
        flag.lower = r[0].get<double>();
        flag.upper = r[1].get<double>();
        break;
      case FlagKind::categorical:
        flag.choices = r.get<std::vector<std::string>>();
        break;
    }
  }
  require(in.contains("default"), "flag " + flag.name + ": missing default");
  flag.default_value = value_from_json(in.at("default"), flag.kind, flag.name);
  flag.group = in.value("group", std::string{});
  flag.render_style = render_style_from_string(in.value("render", std::string("jvm")));
  flag.validate();
}

nlohmann::json flag_space_to_json(const FlagSpace& space) {
  nlohmann::json doc;
  doc["flags"] = nlohmann::json::array();
  for (const auto& f : space.flags()) doc["flags"].push_back(f);
  if (space.active_groups()) doc["active_groups"] = *space.active_groups();
  return doc;
}

FlagSpace flag_space_from_json(const nlohmann::json& doc) {
  require(doc.is_object() && doc.contains("flags") && doc.at("flags").is_array(),
          "flag-space document needs a 'flags' array");
  std::vector<FlagSpec> flags;
  for (const auto& entry : doc.at("flags")) flags.push_back(entry.get<FlagSpec>());
  std::optional<std::set<std::string>> groups;
  if (doc.contains("active_groups")) groups = doc.at("active_groups").get<std::set<std::string>>();
  return FlagSpace(std::move(flags), std::move(groups));
}

}  // namespace flagtune
