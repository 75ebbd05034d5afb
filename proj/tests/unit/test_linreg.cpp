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

#include <cmath>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "flagtune/error.hpp"
#include "flagtune/linreg.hpp"
#include "unit/helpers.hpp"

using namespace flagtune;

namespace {

Dataset line_data(std::size_t n) {
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    data.add(std::vector<double>{x}, 2.0 * x + 1.0);
  }
  return data;
}

Dataset planar_data(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = testing::random_point(rng, d);
    double y = 0.5;
    for (std::size_t j = 0; j < d; ++j) y += (1.0 + static_cast<double>(j)) * x[j];
    data.add(x, y);
  }
  return data;
}

// Least squares through the normal equations, on the given feature map.
std::vector<double> ols_predictions(const Dataset& data, const FeatureMap& map) {
  Eigen::MatrixXd phi(data.size(), map.size());
  Eigen::VectorXd y(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = map(data.x[i]);
    for (std::size_t k = 0; k < row.size(); ++k) phi(i, k) = row[k];
    y(i) = data.y[i];
  }
  const Eigen::VectorXd w = (phi.transpose() * phi).ldlt().solve(phi.transpose() * y);
  const Eigen::VectorXd fitted = phi * w;
  return {fitted.data(), fitted.data() + fitted.size()};
}

}  // namespace

TEST_SUITE("linreg") {
  TEST_CASE("poly feature examples") {
    CHECK(poly_features(std::vector<double>{0.0, 0.0}, 2, false) == std::vector<double>{1, 0, 0, 0, 0});
    CHECK(poly_features(std::vector<double>{0.5, 1.0}, 2, true) == std::vector<double>{1, 0.5, 1.0, 0.25, 1.0, 0.5});
    CHECK(poly_features(std::vector<double>{0.5, 1.0}, 1, false) == std::vector<double>{1, 0.5, 1.0});
    for (std::size_t d : {1u, 2u, 7u, 20u}) CHECK(FeatureMap{d, 2, true}.size() == 1 + d + d + d * (d - 1) / 2);
    CHECK_THROWS_AS(poly_features(std::vector<double>{0.5}, 3, false), Error);
  }

  TEST_CASE("sgd fit of an exact line matches the least-squares oracle") {
    const auto data = line_data(50);
    const FeatureMap map{1, 1, false};
    SgdParams params;
    params.batch_size = 1;
    params.learning_rate = 0.05;
    params.epochs = 500;
    const auto model = fit_sgd(data, map, params);
    const auto oracle = ols_predictions(data, map);
    double sq = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) sq += std::pow(model.predict(data.x[i]) - oracle[i], 2);
    CHECK(std::sqrt(sq / static_cast<double>(data.size())) < 1e-2);
  }

  TEST_CASE("constant targets predict the constant") {
    Dataset data;
    Rng rng(1);
    for (int i = 0; i < 20; ++i) data.add(testing::random_point(rng, 3), 4.25);
    const auto model = fit_sgd(data, FeatureMap{3}, SgdParams{});
    CHECK(model.target_sd() == 1.0);
    for (int i = 0; i < 10; ++i) CHECK(model.predict(testing::random_point(rng, 3)) == doctest::Approx(4.25).epsilon(1e-12));
  }

  TEST_CASE("fit is deterministic per seed and rejects bad input") {
    const auto data = planar_data(60, 4, 2);
    SgdParams p;
    p.seed = 17;
    const auto a = fit_sgd(data, FeatureMap{4}, p);
    const auto b = fit_sgd(data, FeatureMap{4}, p);
    CHECK(std::equal(a.weights().begin(), a.weights().end(), b.weights().begin(), b.weights().end()));
    Dataset tiny;
    tiny.add(std::vector<double>{0.1}, 1.0);
    CHECK_THROWS_AS(fit_sgd(tiny, FeatureMap{1}, p), Error);
    auto bad = line_data(5);
    bad.y[2] = std::nan("");
    CHECK_THROWS_AS(fit_sgd(bad, FeatureMap{1}, p), Error);
  }

  TEST_CASE("predict examples") {
    const LinearModel zero(FeatureMap{2}, std::vector<double>(5, 0.0), 3.5, 2.0);
    CHECK(zero.predict(std::vector<double>{0.3, 0.9}) == 3.5);
    const LinearModel hand(FeatureMap{1, 1}, {1.0, 2.0});
    CHECK(hand.predict(std::vector<double>{3.0}) == 7.0);
    CHECK_THROWS_AS(hand.predict(std::vector<double>{1.0, 2.0}), Error);

    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
      const FeatureMap map{5, 2, true};
      std::vector<double> w(map.size());
      for (auto& v : w) v = uniform01(rng) * 2 - 1;
      const LinearModel m(map, w, 1.5, 0.75);
      const auto x = testing::random_point(rng, 5);
      Eigen::VectorXd phi(static_cast<Eigen::Index>(map.size())), wv(static_cast<Eigen::Index>(map.size()));
      const auto f = map(x);
      for (std::size_t k = 0; k < f.size(); ++k) {
        phi(static_cast<Eigen::Index>(k)) = f[k];
        wv(static_cast<Eigen::Index>(k)) = w[k];
      }
      CHECK(m.predict(x) == doctest::Approx(phi.dot(wv) * 0.75 + 1.5).epsilon(1e-12));
    }
  }

  TEST_CASE("loss gradient examples") {
    const LinearModel m(FeatureMap{1, 1}, {1.0, 2.0});
    const std::vector<double> x{2.0};
    CHECK(m.predict(x) == 5.0);
    CHECK(m.loss_gradient(x, 3.0) == std::vector<double>{2.0, 4.0});
    CHECK(m.loss_gradient(x, 5.0) == std::vector<double>{0.0, 0.0});
  }

  TEST_CASE("property: loss gradient matches central finite differences") {
    Rng rng(6);
    const FeatureMap map{3, 2, true};
    for (int t = 0; t < 30; ++t) {
      std::vector<double> w(map.size());
      for (auto& v : w) v = uniform01(rng) * 2 - 1;
      const double mean = uniform01(rng), sd = 0.5 + uniform01(rng);
      const auto x = testing::random_point(rng, 3);
      const double label = mean + sd * (uniform01(rng) * 4 - 2);
      const auto grad = LinearModel(map, w, mean, sd).loss_gradient(x, label);
      const double h = 1e-6;
      for (std::size_t k = 0; k < w.size(); ++k) {
        auto up = w, down = w;
        up[k] += h;
        down[k] -= h;
        auto loss = [&](const std::vector<double>& wk) {
          const LinearModel lm(map, wk, mean, sd);
          const double r = lm.predict_standardized(x) - lm.standardize(label);
          return 0.5 * r * r;
        };
        const double fd = (loss(up) - loss(down)) / (2 * h);
        CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
      }
    }
  }

  TEST_CASE("property: training loss is non-increasing on noiseless linear data") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto data = planar_data(64, 3, seed);
      SgdParams p;
      p.learning_rate = 0.01;
      p.seed = seed;
      SgdTrace trace;
      fit_sgd(data, FeatureMap{3, 1}, p, &trace);
      REQUIRE(trace.epoch_loss.size() == 200);
      for (std::size_t e = 1; e < trace.epoch_loss.size(); ++e) CHECK(trace.epoch_loss[e] <= trace.epoch_loss[e - 1] + 1e-12);
    }
  }

  TEST_CASE("property: standardize roundtrip and linearity in the weights") {
    Rng rng(12);
    const LinearModel m(FeatureMap{2}, std::vector<double>(5, 0.0), 123.456, 7.89);
    for (int t = 0; t < 100; ++t) {
      const double y = uniform01(rng) * 1000 - 500;
      CHECK(m.destandardize(m.standardize(y)) == doctest::Approx(y).epsilon(1e-12));
    }
    const FeatureMap map{4, 1};
    for (int t = 0; t < 30; ++t) {
      std::vector<double> w1(map.size()), w2(map.size()), mix(map.size());
      const double a = uniform01(rng) * 3 - 1.5, b = uniform01(rng) * 3 - 1.5;
      for (std::size_t k = 0; k < map.size(); ++k) {
        w1[k] = uniform01(rng);
        w2[k] = uniform01(rng);
        mix[k] = a * w1[k] + b * w2[k];
      }
      const auto x = testing::random_point(rng, 4);
      const double lhs = LinearModel(map, mix).predict_standardized(x);
      const double rhs = a * LinearModel(map, w1).predict_standardized(x) + b * LinearModel(map, w2).predict_standardized(x);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }

  TEST_CASE("bootstrap ensemble size, spread and determinism") {
    const auto data = planar_data(80, 2, 21);
    const FeatureMap map{2, 1};
    SgdParams p;
    p.batch_size = 1;
    const auto e = bootstrap_ensemble(data, 4, map, p, 5);
    CHECK(e.size() == 4);
    double mean = 0.0;
    for (double y : data.y) mean += y;
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (double y : data.y) var += (y - mean) * (y - mean);
    const double sd = std::sqrt(var / static_cast<double>(data.size()));
    double worst = 0.0;
    for (const auto& x : data.x) {
      double lo = 1e300, hi = -1e300;
      for (const auto& m : e.members) {
        lo = std::min(lo, m.predict(x));
        hi = std::max(hi, m.predict(x));
      }
      worst = std::max(worst, hi - lo);
    }
    CHECK(worst < 0.1 * sd);
    const auto again = bootstrap_ensemble(data, 4, map, p, 5);
    for (std::size_t z = 0; z < 4; ++z)
      CHECK(std::equal(e.members[z].weights().begin(), e.members[z].weights().end(), again.members[z].weights().begin()));
    CHECK_THROWS_AS(bootstrap_ensemble(data, 1, map, p, 5), Error);
  }

  TEST_CASE("model json roundtrip") {
    const LinearModel m(FeatureMap{2, 2, true}, {0.1, -0.2, 0.3, 0.4, -0.5, 0.6}, 2.5, 0.125);
    const auto back = model_from_json(model_to_json(m));
    CHECK(back.feature_map() == m.feature_map());
    CHECK(std::equal(back.weights().begin(), back.weights().end(), m.weights().begin(), m.weights().end()));
    CHECK(back.target_mean() == 2.5);
    CHECK(back.target_sd() == 0.125);
  }
}
