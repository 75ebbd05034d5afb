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

// Dataset CSV: header row, one column per active flag in space order, then
// one column per metric. This file is the hand-off between the data
// generation and selection phases.

#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "flagtune/dataset.hpp"
#include "flagtune/executor.hpp"
#include "flagtune/flagspace.hpp"

namespace flagtune {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index, or npos.
  std::size_t column(std::string_view name) const noexcept;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv_file(const std::filesystem::path& path);

// Metric columns are the union of metric names over `trials`, sorted.
std::string dataset_csv(const FlagSpace& space, const std::vector<TrialRecord>& trials);

// Encodes each row over `space`'s active flags; values are `metric`.
// Columns not in `space` are ignored.
Dataset dataset_from_csv(const CsvTable& table, const FlagSpace& space, std::string_view metric);

// Writes to a sibling temporary and renames, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace flagtune
