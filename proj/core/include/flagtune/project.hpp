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

// Project file: one JSON document describing the flag space, the target,
// the objective and the settings of every phase. Relative paths resolve
// against the project file's directory.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flagtune/active_learn.hpp"
#include "flagtune/executor.hpp"
#include "flagtune/featsel.hpp"
#include "flagtune/flagspace.hpp"
#include "flagtune/tuners.hpp"

namespace flagtune {

// Relevant flags are named; centers are in encoded [0, 1] units.
struct VirtualTargetSettings {
  std::vector<std::string> relevant;
  std::vector<double> centers;
  std::vector<double> weights;
  double noise_sd = 0.0;
  double base = 1.0;
};

struct LassoSettings {
  std::optional<double> lambda;  // fixed; otherwise chosen from grid by CV
  std::vector<double> grid;
  std::size_t folds = 5;
  double threshold = 0.0;
  LassoOptions options;
};

struct TunerSettings {
  std::string algorithm = "bo";
  int budget = 20;
  std::size_t init_size = 8;
  double xi = 0.01;
  double failure_penalty = 1.5;
  int gp_restarts = 5;
  int confirm_runs = 1;
  SaOptions sa;
};

struct ProjectConfig {
  std::filesystem::path base_dir;
  FlagSpace space;
  std::optional<TargetSpec> process;
  std::optional<VirtualTargetSettings> virtual_target;
  Objective objective;
  AlSettings active_learning;
  LassoSettings lasso;
  TunerSettings tuner;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  void validate() const;
};

ProjectConfig project_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ProjectConfig load_project(const std::filesystem::path& path);

VirtualTarget make_virtual_target(const VirtualTargetSettings& settings, const FlagSpace& space);
std::unique_ptr<Evaluator> make_evaluator(const ProjectConfig& project);

inline constexpr const char* kAlgorithms[] = {"bo", "bo-warm", "rbo", "sa"};
bool known_algorithm(std::string_view name) noexcept;

}  // namespace flagtune
