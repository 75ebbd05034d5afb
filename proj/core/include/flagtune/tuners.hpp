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

// Search drivers that find good values for the selected flags: Bayesian
// optimization (cold and warm-started), regression-guided Bayesian
// optimization and simulated annealing seeded by a Latin hypercube.
//
// Every driver measures the default configuration once and keeps it as an
// incumbent candidate, so a report never recommends something that looked
// worse than the defaults.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flagtune/acquisition.hpp"
#include "flagtune/dataset.hpp"
#include "flagtune/executor.hpp"
#include "flagtune/gp.hpp"
#include "flagtune/linreg.hpp"
#include "flagtune/objective.hpp"

namespace flagtune {

struct Objective {
  std::string metric = "time";
  Direction direction = Direction::minimize;
};

struct TuneTask {
  Evaluator* evaluator = nullptr;
  // Flags to tune, a subset of the evaluator's active flags; empty tunes all
  // of them. Untuned flags stay at their defaults.
  std::vector<std::string> flags;
  Objective objective;
  int budget = 20;
  std::size_t init_size = 8;
  std::uint64_t seed = 0;
  GpOptions gp;
  AcquisitionOptions acquisition;
  double xi = 0.01;  // EI margin, in units of the surrogate's target sd
  // Failed trials score worst-so-far scaled by this factor.
  double failure_penalty = 1.5;

  void validate(bool needs_init) const;
};

struct SaOptions {
  std::size_t lhs_init = 8;
  std::optional<double> t0;  // default: sample sd of the LHS values
  double alpha = 0.95;
  double step_sd = 0.1;
};

struct TrajectoryEntry {
  int iteration = 0;
  std::string phase;  // default, init, search, confirm
  Configuration config;
  double value = 0.0;
  double incumbent = 0.0;
  bool failed = false;
  std::optional<double> predicted;
};

struct TuningReport {
  std::string algorithm;
  Objective objective;
  std::vector<std::string> tuned_flags;
  Configuration best_config;
  double best_value = 0.0;
  double default_value = 0.0;
  double speedup = 1.0;
  std::vector<TrajectoryEntry> trajectory;
  std::size_t real_executions = 0;  // excludes the single default run
  std::size_t default_runs = 1;
  std::size_t failed_executions = 0;
  std::size_t model_evaluations = 0;
  std::optional<double> initial_incumbent;  // warm start: best value in the prior data
  std::optional<double> predicted_value;    // rbo
  std::optional<double> confirmed_value;    // rbo
  std::vector<GpHyperparameters> hyperparameter_log;

  std::size_t total_executions() const noexcept { return real_executions + default_runs; }
};

// default/best when minimizing, best/default when maximizing.
double speedup(Direction direction, double default_value, double best_value);

// 1 for delta <= 0, exp(-delta / T) otherwise (0 when T <= 0).
double sa_acceptance_probability(double delta, double temperature);

TuningReport tune_bo(const TuneTask& task);
// `prior` rows are encodings over the tuned flags, values in metric units.
TuningReport tune_bo_warm(const TuneTask& task, const Dataset& prior);
// `model` covers the evaluator's full active space.
TuningReport tune_rbo(const TuneTask& task, const LinearModel& model, int confirm_runs = 1);
TuningReport tune_sa(const TuneTask& task, const SaOptions& options = {});

nlohmann::json tuning_report_to_json(const TuningReport& report);
TuningReport tuning_report_from_json(const nlohmann::json& doc);
std::string trajectory_csv(const TuningReport& report);

}  // namespace flagtune
