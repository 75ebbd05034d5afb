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

#include "flagtune/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "flagtune/error.hpp"

namespace flagtune {
namespace {

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string cell(const FlagValue& value) {
  if (const auto* d = std::get_if<double>(&value)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  return quote(format_value(value));
}

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(ErrorKind::parse, std::string(what) + ": not a number: '" + std::string(text) + "'");
  return v;
}

FlagValue parse_cell(const FlagSpec& flag, std::string_view text) {
  const std::string what = "column " + flag.name;
  switch (flag.kind) {
    case FlagKind::boolean:
      if (text == "true") return true;
      if (text == "false") return false;
      fail(ErrorKind::parse, what + ": expected true or false, got '" + std::string(text) + "'");
    case FlagKind::integer: {
      std::int64_t v = 0;
      const auto* end = text.data() + text.size();
      const auto [ptr, ec] = std::from_chars(text.data(), end, v);
      if (ec != std::errc() || ptr != end) fail(ErrorKind::parse, what + ": not an integer: '" + std::string(text) + "'");
      return v;
    }
    case FlagKind::continuous:
      return parse_double(text, what);
    case FlagKind::categorical:
      return std::string(text);
  }
  fail(ErrorKind::parse, what + ": unknown kind");
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::string_view::npos;
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      field.clear();
      record.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) fail(ErrorKind::parse, "unterminated quoted field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) fail(ErrorKind::parse, "empty CSV");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      fail(ErrorKind::parse, "CSV row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                                 " fields, header has " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  return parse_csv(read_file(path));
}

std::string dataset_csv(const FlagSpace& space, const std::vector<TrialRecord>& trials) {
  std::set<std::string> metrics;
  for (const auto& t : trials)
    for (const auto& [name, value] : t.metrics) metrics.insert(name);
  std::string out;
  const auto names = space.active_names();
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + quote(names[i]);
  for (const auto& m : metrics) out += "," + quote(m);
  out += '\n';
  char buf[32];
  for (const auto& t : trials) {
    if (!t.ok()) continue;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto* value = t.config.find(names[i]);
      require(value != nullptr, "trial is missing flag " + names[i]);
      if (i) out += ',';
      out += cell(*value);
    }
    for (const auto& m : metrics) {
      out += ',';
      const auto it = t.metrics.find(m);
      if (it != t.metrics.end()) {
        std::snprintf(buf, sizeof buf, "%.17g", it->second);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

Dataset dataset_from_csv(const CsvTable& table, const FlagSpace& space, std::string_view metric) {
  const auto metric_col = table.column(metric);
  if (metric_col == std::string_view::npos)
    fail(ErrorKind::invalid_argument, "metric column '" + std::string(metric) + "' not found in dataset");
  std::vector<std::size_t> cols;
  for (std::size_t d = 0; d < space.dimension(); ++d) {
    const auto& name = space.active_flag(d).name;
    const auto c = table.column(name);
    if (c == std::string_view::npos) fail(ErrorKind::parse, "flag column '" + name + "' not found in dataset");
    cols.push_back(c);
  }
  if (table.rows.empty()) fail(ErrorKind::parse, "dataset has no rows");
  Dataset data;
  for (const auto& row : table.rows) {
    if (row[metric_col].empty()) continue;
    Configuration config;
    for (std::size_t d = 0; d < cols.size(); ++d) {
      const auto& flag = space.active_flag(d);
      config.set(flag.name, parse_cell(flag, row[cols[d]]));
    }
    data.add(encode(space, config), parse_double(row[metric_col], "column " + std::string(metric)));
  }
  if (data.empty()) fail(ErrorKind::parse, "dataset has no values for metric '" + std::string(metric) + "'");
  return data;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorKind::io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace flagtune
