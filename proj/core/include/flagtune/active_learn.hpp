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

// Batch-mode expected-model-change active learning. Chooses which
// configurations to execute so that a small number of runs characterizes
// the target's metric response.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flagtune/dataset.hpp"
#include "flagtune/executor.hpp"
#include "flagtune/linreg.hpp"

namespace flagtune {

struct AlBudget {
  double batch_fraction = 0.03;  // of the initial pool, per round
  int max_rounds = 10;
  double rel_rmse_eps = 0.01;  // stop when the relative test-RMSE change drops below this
  std::size_t ensemble_size = 8;
  std::optional<double> max_wall_clock_s;

  void validate() const;
};

enum class BatchStrategy {
  greedy,  // argmax, pseudo-update a scratch model, re-score
  top_k,   // k best scores against the unmodified model
  random,  // uniform pick; baseline for comparisons
};

std::string_view to_string(BatchStrategy strategy) noexcept;
BatchStrategy batch_strategy_from_string(std::string_view text);

struct AlSettings {
  AlBudget budget;
  std::string metric = "time";
  // Total random candidates; split into seed, test and pool.
  std::size_t candidates = 300;
  double seed_fraction = 0.10;
  double test_fraction = 0.20;
  int degree = 2;
  bool interactions = false;
  SgdParams sgd;
  BatchStrategy strategy = BatchStrategy::greedy;

  void validate() const;
};

struct AlState {
  Dataset labeled;
  std::vector<std::vector<double>> pool;
  Dataset test;
  LinearModel model;
  ModelEnsemble ensemble;
  int round = 0;
  std::vector<double> rmse_history;
};

// Mean over ensemble members z of ||(f(x) - y_z) phi(x)||, all on the main
// model's standardized scale.
double expected_model_change(const LinearModel& model, const ModelEnsemble& ensemble, std::span<const double> x);

// Returns k distinct indices into state.pool. `learning_rate` drives the
// greedy strategy's pseudo-update; `seed` only matters for BatchStrategy::random.
std::vector<std::size_t> select_batch(const AlState& state, std::size_t k,
                                      BatchStrategy strategy = BatchStrategy::greedy,
                                      double learning_rate = 0.01, std::uint64_t seed = 0);

struct AlRound {
  int round = 0;
  double test_rmse = 0.0;
  std::size_t labeled = 0;          // training labels behind this round's model
  std::vector<std::size_t> batch;  // candidate ids selected after this fit
  std::size_t trials = 0;          // cumulative executions
};

struct AlReport {
  std::size_t seed_size = 0;
  std::size_t test_size = 0;
  std::size_t pool_size = 0;
  std::size_t batch_size = 0;
  std::vector<AlRound> rounds;
  std::vector<double> rmse_history;  // one entry per fitted model, seed model first
  std::size_t total_trials = 0;
  std::size_t failed_trials = 0;
  std::string stop_reason;
};

nlohmann::json al_report_to_json(const AlReport& report);

struct AlResult {
  std::vector<TrialRecord> trials;  // ok trials: seed, test, then batches, in execution order
  Dataset labeled;
  Dataset test;
  LinearModel model;
  AlReport report;
};

// Seed and test sets are executed up front; each round fits the model and
// ensemble, records test RMSE, then labels one batch from the pool.
AlResult run_al_loop(Evaluator& evaluator, const AlSettings& settings, std::uint64_t seed);

}  // namespace flagtune
