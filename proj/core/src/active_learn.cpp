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

#include "flagtune/active_learn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "flagtune/error.hpp"
#include "flagtune/random.hpp"

namespace flagtune {
namespace {

double norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

// Seed streams, kept apart so that changing one stage never shifts another.
enum Stream : std::uint64_t { kPool = 1, kModel = 2, kEnsemble = 3, kTrials = 4, kRandomPick = 5 };

}  // namespace

void AlBudget::validate() const {
  require(batch_fraction > 0.0 && batch_fraction < 1.0, "batch_fraction must lie in (0, 1)");
  require(max_rounds >= 1, "max_rounds must be at least 1");
  require(rel_rmse_eps >= 0.0, "rel_rmse_eps must be non-negative");
  require(ensemble_size >= 2, "ensemble size must be at least 2");
  require(!max_wall_clock_s || *max_wall_clock_s > 0.0, "max_wall_clock_s must be positive");
}

void AlSettings::validate() const {
  budget.validate();
  require(seed_fraction > 0.0 && test_fraction > 0.0 && seed_fraction + test_fraction < 1.0,
          "seed and test fractions must be positive and leave room for a pool");
  require(degree == 1 || degree == 2, "unsupported polynomial degree");
}

std::string_view to_string(BatchStrategy strategy) noexcept {
  switch (strategy) {
    case BatchStrategy::greedy: return "greedy";
    case BatchStrategy::top_k: return "top_k";
    case BatchStrategy::random: return "random";
  }
  return "?";
}

BatchStrategy batch_strategy_from_string(std::string_view text) {
  if (text == "greedy") return BatchStrategy::greedy;
  if (text == "top_k") return BatchStrategy::top_k;
  if (text == "random") return BatchStrategy::random;
  fail(ErrorKind::parse, "unknown batch strategy '" + std::string(text) + "'");
}

double expected_model_change(const LinearModel& model, const ModelEnsemble& ensemble, std::span<const double> x) {
  require(ensemble.size() > 0, "expected_model_change: empty ensemble");
  const double phi_norm = norm(model.feature_map()(x));
  const double f = model.predict_standardized(x);
  double total = 0.0;
  for (const auto& member : ensemble.members) total += std::abs(f - model.standardize(member.predict(x)));
  return phi_norm * total / static_cast<double>(ensemble.size());
}

std::vector<std::size_t> select_batch(const AlState& state, std::size_t k, BatchStrategy strategy,
                                      double learning_rate, std::uint64_t seed) {
  const std::size_t m = state.pool.size();
  require(m > 0, "select_batch: empty pool");
  require(k <= m, "select_batch: batch larger than the pool");
  std::vector<std::size_t> picked;
  picked.reserve(k);

  if (strategy == BatchStrategy::random) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    picked.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    return picked;
  }

  const auto& model = state.model;
  const auto& ensemble = state.ensemble;
  require(ensemble.size() > 0, "select_batch: ensemble not fitted");

  // Ensemble labels and feature norms do not change between picks.
  std::vector<double> phi_norm(m), label_mean(m);
  std::vector<std::vector<double>> labels(m, std::vector<double>(ensemble.size()));
  for (std::size_t i = 0; i < m; ++i) {
    phi_norm[i] = norm(model.feature_map()(state.pool[i]));
    double sum = 0.0;
    for (std::size_t z = 0; z < ensemble.size(); ++z) {
      labels[i][z] = model.standardize(ensemble.members[z].predict(state.pool[i]));
      sum += labels[i][z];
    }
    label_mean[i] = sum / static_cast<double>(ensemble.size());
  }
  auto score = [&](const LinearModel& scratch, std::size_t i) {
    const double f = scratch.predict_standardized(state.pool[i]);
    double total = 0.0;
    for (double y : labels[i]) total += std::abs(f - y);
    return phi_norm[i] * total / static_cast<double>(labels[i].size());
  };

  std::vector<bool> taken(m, false);
  if (strategy == BatchStrategy::top_k) {
    std::vector<double> scores(m);
    for (std::size_t i = 0; i < m; ++i) scores[i] = score(model, i);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    picked.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    return picked;
  }

  LinearModel scratch = model;
  while (picked.size() < k) {
    std::size_t best = m;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (taken[i]) continue;
      const double s = score(scratch, i);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    taken[best] = true;
    picked.push_back(best);
    scratch.step_towards(state.pool[best], label_mean[best], learning_rate);
  }
  return picked;
}

nlohmann::json al_report_to_json(const AlReport& report) {
  nlohmann::json doc;
  doc["seed_size"] = report.seed_size;
  doc["test_size"] = report.test_size;
  doc["pool_size"] = report.pool_size;
  doc["batch_size"] = report.batch_size;
  doc["rmse_history"] = report.rmse_history;
  doc["rounds"] = nlohmann::json::array();
  for (const auto& r : report.rounds) {
    doc["rounds"].push_back({{"round", r.round},
                             {"test_rmse", r.test_rmse},
                             {"labeled", r.labeled},
                             {"batch", r.batch},
                             {"trials", r.trials}});
  }
  doc["total_trials"] = report.total_trials;
  doc["failed_trials"] = report.failed_trials;
  doc["stop_reason"] = report.stop_reason;
  return doc;
}

AlResult run_al_loop(Evaluator& evaluator, const AlSettings& settings, std::uint64_t seed) {
  settings.validate();
  const auto& space = evaluator.space();
  const std::size_t d = space.dimension();
  require(d > 0, "flag space has no active flags");

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n_seed = static_cast<std::size_t>(std::llround(settings.seed_fraction * settings.candidates));
  const std::size_t n_test = static_cast<std::size_t>(std::llround(settings.test_fraction * settings.candidates));
  require(n_seed >= 2 && n_test >= 1 && n_seed + n_test < settings.candidates,
          "candidate budget too small for the seed/test/pool split");
  const std::size_t n_pool = settings.candidates - n_seed - n_test;

  // Candidates are snapped through decode so every encoding is executable as-is.
  Rng pool_rng(derive_seed(seed, kPool));
  std::vector<std::vector<double>> candidates(settings.candidates, std::vector<double>(d));
  for (auto& c : candidates) {
    for (auto& v : c) v = uniform01(pool_rng);
    c = encode(space, decode(space, c));
  }

  AlResult result;
  auto& report = result.report;
  report.seed_size = n_seed;
  report.test_size = n_test;
  report.pool_size = n_pool;
  report.batch_size = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(settings.budget.batch_fraction * n_pool)));

  std::uint64_t trial_index = 0;
  auto execute = [&](const std::vector<double>& x) -> std::optional<double> {
    auto record = evaluator.run(decode(space, x), derive_seed(derive_seed(seed, kTrials), trial_index++));
    ++report.total_trials;
    const auto metric = record.metrics.find(settings.metric);
    if (!record.ok() || metric == record.metrics.end() || !std::isfinite(metric->second)) {
      ++report.failed_trials;
      return std::nullopt;
    }
    const double value = metric->second;
    result.trials.push_back(std::move(record));
    return value;
  };

  AlState state;
  for (std::size_t i = 0; i < n_seed; ++i)
    if (auto y = execute(candidates[i])) state.labeled.add(candidates[i], *y);
  if (state.labeled.size() < 2) fail(ErrorKind::target_failure, "cannot characterize target: seed trials failed");
  for (std::size_t i = n_seed; i < n_seed + n_test; ++i)
    if (auto y = execute(candidates[i])) state.test.add(candidates[i], *y);
  if (state.test.empty()) fail(ErrorKind::target_failure, "cannot characterize target: test trials failed");

  std::vector<std::size_t> pool_ids;
  for (std::size_t i = n_seed + n_test; i < settings.candidates; ++i) {
    state.pool.push_back(candidates[i]);
    pool_ids.push_back(i);
  }

  const FeatureMap map{d, settings.degree, settings.interactions};
  for (;;) {
    SgdParams sgd = settings.sgd;
    sgd.seed = derive_seed(derive_seed(seed, kModel), static_cast<std::uint64_t>(state.round));
    state.model = fit_sgd(state.labeled, map, sgd);
    const double test_rmse = rmse(state.model, state.test);
    state.rmse_history.push_back(test_rmse);

    AlRound round;
    round.round = state.round;
    round.test_rmse = test_rmse;
    round.labeled = state.labeled.size();

    const auto& h = state.rmse_history;
    if (h.size() >= 2) {
      const double prev = h[h.size() - 2];
      const double change = prev > 0.0 ? std::abs(prev - h.back()) / prev : 0.0;
      if (change < settings.budget.rel_rmse_eps) report.stop_reason = "rmse converged";
    }
    if (report.stop_reason.empty() && state.round >= settings.budget.max_rounds) report.stop_reason = "max rounds";
    if (report.stop_reason.empty() && state.pool.empty()) report.stop_reason = "pool exhausted";
    if (report.stop_reason.empty() && settings.budget.max_wall_clock_s &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >
            *settings.budget.max_wall_clock_s)
      report.stop_reason = "wall-clock budget";
    if (!report.stop_reason.empty()) {
      round.trials = report.total_trials;
      report.rounds.push_back(round);
      break;
    }

    if (settings.strategy != BatchStrategy::random) {
      state.ensemble = bootstrap_ensemble(state.labeled, settings.budget.ensemble_size, map, settings.sgd,
                                          derive_seed(derive_seed(seed, kEnsemble), static_cast<std::uint64_t>(state.round)));
    }
    const std::size_t k = std::min(report.batch_size, state.pool.size());
    auto picked = select_batch(state, k, settings.strategy, settings.sgd.learning_rate,
                               derive_seed(derive_seed(seed, kRandomPick), static_cast<std::uint64_t>(state.round)));
    for (auto i : picked) {
      round.batch.push_back(pool_ids[i]);
      if (auto y = execute(state.pool[i])) state.labeled.add(state.pool[i], *y);
    }
    std::sort(picked.rbegin(), picked.rend());
    for (auto i : picked) {
      state.pool.erase(state.pool.begin() + static_cast<std::ptrdiff_t>(i));
      pool_ids.erase(pool_ids.begin() + static_cast<std::ptrdiff_t>(i));
    }
    round.trials = report.total_trials;
    report.rounds.push_back(std::move(round));
    ++state.round;
  }

  report.rmse_history = state.rmse_history;
  result.labeled = std::move(state.labeled);
  result.test = std::move(state.test);
  result.model = std::move(state.model);
  return result;
}

}  // namespace flagtune
