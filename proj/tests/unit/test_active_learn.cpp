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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "flagtune/active_learn.hpp"
#include "flagtune/error.hpp"
#include "unit/helpers.hpp"

using namespace flagtune;

namespace {

class FailingEvaluator final : public Evaluator {
 public:
  explicit FailingEvaluator(FlagSpace space) : space_(std::move(space)) {}
  const FlagSpace& space() const override { return space_; }
  TrialRecord run(const Configuration& config, std::uint64_t) override {
    count_trial();
    TrialRecord r;
    r.config = config;
    r.status = TrialStatus::crashed;
    return r;
  }

 private:
  FlagSpace space_;
};

AlState tiny_state() {
  AlState s;
  const FeatureMap map{1, 1};
  s.model = LinearModel(map, {0.0, 0.0});
  s.ensemble.members = {LinearModel(map, {1.0, 0.5}), LinearModel(map, {-1.0, 2.0}), LinearModel(map, {0.5, -1.0})};
  for (double x : {0.0, 0.9, 0.3, 0.6, 1.0}) s.pool.push_back({x});
  return s;
}

AlSettings quick_settings() {
  AlSettings st;
  st.candidates = 200;
  st.budget.max_rounds = 3;
  st.budget.rel_rmse_eps = 0.0;
  st.sgd.batch_size = 1;
  st.sgd.learning_rate = 0.02;
  st.sgd.epochs = 100;
  return st;
}

}  // namespace

TEST_SUITE("active_learn") {
  TEST_CASE("expected model change examples") {
    const FeatureMap map{1, 1};
    const LinearModel model(map, {0.0, 0.0});
    const std::vector<double> x{0.0};
    ModelEnsemble agree{{model, model}};
    CHECK(expected_model_change(model, agree, x) == 0.0);
    ModelEnsemble split{{LinearModel(map, {1.0, 0.0}), LinearModel(map, {-1.0, 0.0})}};
    CHECK(expected_model_change(model, split, x) == 1.0);
    ModelEnsemble swapped{{split.members[1], split.members[0]}};
    CHECK(expected_model_change(model, swapped, x) == expected_model_change(model, split, x));
  }

  TEST_CASE("property: score is non-negative and equals the gradient norm when members coincide") {
    Rng rng(31);
    const FeatureMap map{3, 2};
    for (int t = 0; t < 50; ++t) {
      std::vector<double> w(map.size()), u(map.size());
      for (auto& v : w) v = uniform01(rng) - 0.5;
      for (auto& v : u) v = uniform01(rng) - 0.5;
      const LinearModel model(map, w, 2.0, 3.0);
      const LinearModel member(map, u, 2.0, 3.0);
      const auto x = testing::random_point(rng, 3);
      const double score = expected_model_change(model, ModelEnsemble{{member, member, member}}, x);
      CHECK(score >= 0.0);
      const auto grad = model.loss_gradient(x, member.predict(x));
      double norm = 0.0;
      for (double g : grad) norm += g * g;
      CHECK(score == doctest::Approx(std::sqrt(norm)).epsilon(1e-12));
    }
  }

  TEST_CASE("k = 1 picks the single argmax") {
    const auto s = tiny_state();
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.pool.size(); ++i)
      if (expected_model_change(s.model, s.ensemble, s.pool[i]) > expected_model_change(s.model, s.ensemble, s.pool[best])) best = i;
    CHECK(select_batch(s, 1) == std::vector<std::size_t>{best});
  }

  TEST_CASE("k = |pool| returns a permutation of the pool") {
    const auto s = tiny_state();
    for (auto strategy : {BatchStrategy::greedy, BatchStrategy::top_k, BatchStrategy::random}) {
      auto picked = select_batch(s, s.pool.size(), strategy, 0.01, 3);
      std::sort(picked.begin(), picked.end());
      CHECK(picked == std::vector<std::size_t>{0, 1, 2, 3, 4});
    }
  }

  TEST_CASE("dominant candidate is selected first; ties go to the lower index") {
    AlState s;
    const FeatureMap map{1, 1};
    s.model = LinearModel(map, {0.0, 0.0});
    s.ensemble.members = {LinearModel(map, {0.2, 1.0}), LinearModel(map, {-0.1, 2.0})};
    s.pool = {{0.1}, {0.9}};
    // Every member disagrees with the model more at 0.9 than at 0.1.
    for (const auto& m : s.ensemble.members)
      CHECK(std::abs(m.predict_standardized(s.pool[1])) > std::abs(m.predict_standardized(s.pool[0])));
    CHECK(select_batch(s, 2).front() == 1);

    s.pool = {{0.5}, {0.5}, {0.5}};
    CHECK(select_batch(s, 1) == std::vector<std::size_t>{0});
  }

  TEST_CASE("select_batch rejects an empty pool or oversize batch") {
    auto s = tiny_state();
    CHECK_THROWS_AS(select_batch(s, 6), Error);
    s.pool.clear();
    CHECK_THROWS_AS(select_batch(s, 0), Error);
  }

  TEST_CASE("max_rounds = 1 labels exactly one batch beyond the seed set") {
    const auto space = testing::unit_space(4);
    VirtualExecutor ex(testing::sparse_target(4, {0, 1}, {0.3, 0.7}, {2.0, 1.0}), space);
    auto st = quick_settings();
    st.budget.max_rounds = 1;
    const auto r = run_al_loop(ex, st, 1);
    CHECK(r.report.seed_size == 20);
    CHECK(r.report.test_size == 40);
    CHECK(r.report.pool_size == 140);
    CHECK(r.report.batch_size == 4);
    CHECK(r.labeled.size() == 24);
    CHECK(r.report.rmse_history.size() == 2);
    CHECK(r.report.stop_reason == "max rounds");
    CHECK(ex.trials() == 64);
  }

  TEST_CASE("final history entry describes the returned model") {
    const auto space = testing::unit_space(4);
    VirtualExecutor ex(testing::sparse_target(4, {0, 1}, {0.3, 0.7}, {2.0, 1.0}, 0.01), space);
    const auto r = run_al_loop(ex, quick_settings(), 2);
    REQUIRE_FALSE(r.report.rmse_history.empty());
    CHECK(r.report.rmse_history.back() == rmse(r.model, r.test));
    CHECK(r.report.rounds.size() == r.report.rmse_history.size());
  }

  TEST_CASE("stopping thresholds: infinite eps stops after one round, zero eps runs to max_rounds") {
    const auto space = testing::unit_space(3);
    const auto target = testing::sparse_target(3, {0}, {0.4}, {3.0}, 0.01);
    auto st = quick_settings();
    st.budget.max_rounds = 4;
    st.budget.rel_rmse_eps = std::numeric_limits<double>::infinity();
    VirtualExecutor a(target, space);
    const auto one = run_al_loop(a, st, 3);
    CHECK(one.report.rounds.size() == 2);
    CHECK(one.report.stop_reason == "rmse converged");
    st.budget.rel_rmse_eps = 0.0;
    VirtualExecutor b(target, space);
    const auto all = run_al_loop(b, st, 3);
    CHECK(all.report.rounds.size() == 5);
    CHECK(all.report.stop_reason == "max rounds");
  }

  TEST_CASE("property: no configuration is labeled twice and batches grow the labeled set exactly") {
    const auto space = testing::unit_space(5);
    VirtualExecutor ex(testing::sparse_target(5, {1, 3}, {0.5, 0.2}, {1.0, 2.0}, 0.05), space);
    const auto r = run_al_loop(ex, quick_settings(), 4);
    std::set<std::vector<double>> seen(r.labeled.x.begin(), r.labeled.x.end());
    CHECK(seen.size() == r.labeled.size());
    for (const auto& x : r.test.x) CHECK(seen.count(x) == 0);
    std::set<std::size_t> ids;
    for (const auto& round : r.report.rounds)
      for (auto id : round.batch) CHECK(ids.insert(id).second);
    for (std::size_t i = 1; i < r.report.rounds.size(); ++i)
      CHECK(r.report.rounds[i].labeled == r.report.rounds[i - 1].labeled + r.report.rounds[i - 1].batch.size());
  }

  TEST_CASE("property: identical seeds on a noiseless target give identical datasets") {
    const auto space = testing::unit_space(4);
    const auto target = testing::sparse_target(4, {0, 2}, {0.1, 0.8}, {1.0, 1.0});
    VirtualExecutor a(target, space), b(target, space);
    const auto ra = run_al_loop(a, quick_settings(), 9);
    const auto rb = run_al_loop(b, quick_settings(), 9);
    CHECK(ra.labeled.x == rb.labeled.x);
    CHECK(ra.labeled.y == rb.labeled.y);
    CHECK(ra.report.rmse_history == rb.report.rmse_history);
  }

  TEST_CASE("all seed trials failing cannot characterize the target") {
    FailingEvaluator ex(testing::unit_space(3));
    try {
      run_al_loop(ex, quick_settings(), 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::target_failure);
      CHECK(std::string(e.what()).find("cannot characterize target") != std::string::npos);
    }
  }

  TEST_CASE("report serializes rounds and history") {
    const auto space = testing::unit_space(3);
    VirtualExecutor ex(testing::sparse_target(3, {0}, {0.4}, {3.0}), space);
    const auto r = run_al_loop(ex, quick_settings(), 5);
    const auto doc = al_report_to_json(r.report);
    CHECK(doc.at("rounds").size() == r.report.rounds.size());
    CHECK(doc.at("rmse_history").get<std::vector<double>>() == r.report.rmse_history);
    CHECK(doc.at("stop_reason") == r.report.stop_reason);
  }

  TEST_CASE("AL final model beats an equal number of random labels in at least 8 of 10 seeds") {
    const auto space = testing::unit_space(20);
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(derive_seed(1234, seed));
      std::vector<std::size_t> dims(20);
      for (std::size_t i = 0; i < 20; ++i) dims[i] = i;
      std::shuffle(dims.begin(), dims.end(), rng);
      std::vector<std::size_t> rel(dims.begin(), dims.begin() + 4);
      std::vector<double> centers, weights;
      for (int k = 0; k < 4; ++k) {
        centers.push_back(0.2 + 0.6 * uniform01(rng));
        weights.push_back(5.0 * (1.0 + uniform01(rng)));
      }
      const auto target = testing::sparse_target(20, rel, centers, weights, 0.05);
      AlSettings st;
      st.candidates = 3090;
      st.seed_fraction = 30.0 / 3090.0;
      st.test_fraction = 60.0 / 3090.0;
      st.budget.batch_fraction = 0.002;
      st.budget.max_rounds = 40;
      st.budget.ensemble_size = 16;
      st.budget.rel_rmse_eps = 0.0;
      st.sgd.batch_size = 1;
      st.sgd.learning_rate = 0.02;
      st.sgd.epochs = 300;
      VirtualExecutor al(target, space), rnd(target, space);
      const auto a = run_al_loop(al, st, seed);
      st.strategy = BatchStrategy::random;
      const auto r = run_al_loop(rnd, st, seed);
      REQUIRE(a.labeled.size() == r.labeled.size());
      if (a.report.rmse_history.back() <= r.report.rmse_history.back()) ++wins;
    }
    CHECK(wins >= 8);
  }
}
