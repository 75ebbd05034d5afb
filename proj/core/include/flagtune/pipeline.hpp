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

// The four pipeline phases. Each reads only the artifacts of earlier phases
// from the project's output directory and writes only its own.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flagtune/project.hpp"
#include "flagtune/tuners.hpp"

namespace flagtune {

struct RunArtifacts {
  std::filesystem::path dataset;           // datagen
  std::filesystem::path trials;            // datagen, JSON lines
  std::filesystem::path al_report;         // datagen
  std::filesystem::path model;             // datagen
  std::filesystem::path selected_flags;    // select
  std::filesystem::path selection_report;  // select
  std::filesystem::path tuning_report;     // tune
  std::filesystem::path trajectory;        // tune
  std::filesystem::path summary;           // tune
  std::filesystem::path report_text;       // report
  std::filesystem::path report_csv;        // report
};

RunArtifacts artifact_paths(const std::filesystem::path& output_dir, const std::string& algorithm = {});

RunArtifacts cmd_datagen(const ProjectConfig& project);
RunArtifacts cmd_select(const ProjectConfig& project);
// all_flags skips selection and tunes every active flag.
RunArtifacts cmd_tune(const ProjectConfig& project, const std::string& algorithm, bool all_flags);

struct ComparisonRow {
  std::string algorithm;
  double default_value = 0.0;
  double best_value = 0.0;
  double speedup = 1.0;
  double improvement_pct = 0.0;  // relative gain over default, in percent
  std::size_t executions = 0;    // including the default run
};

struct ComparisonTable {
  std::string metric;
  Direction direction = Direction::minimize;
  std::vector<ComparisonRow> rows;  // bo, bo-warm, rbo, sa order
};

double improvement_percent(Direction direction, double default_value, double best_value);
ComparisonTable comparison_table(const std::vector<TuningReport>& reports);
std::string comparison_text(const ComparisonTable& table);
std::string comparison_csv(const ComparisonTable& table);
std::string tuning_summary(const TuningReport& report, const FlagSpace& space);

// Collects every tuning report in the output directory.
ComparisonTable cmd_report(const ProjectConfig& project);

}  // namespace flagtune
