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
#include <numbers>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "flagtune/error.hpp"
#include "flagtune/gp.hpp"
#include "unit/helpers.hpp"

using namespace flagtune;

namespace {

double matern(double r2, double ell, double s2) {
  const double r = std::sqrt(5.0 * r2) / ell;
  return s2 * (1.0 + r + r * r / 3.0) * std::exp(-r);
}

// Direct dense solve: standardize y, K + (noise + 1e-8) I, mean k*' K^-1 y, variance s2 - k*' K^-1 k*.
GpPrediction dense_posterior(const Dataset& data, const GpHyperparameters& h, const std::vector<double>& x) {
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = data.y[static_cast<std::size_t>(i)];
  const double mean = y.mean();
  const double sd = std::sqrt((y.array() - mean).square().mean());
  y = (y.array() - mean) / sd;
  auto dist2 = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
  };
  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      k(i, j) = matern(dist2(data.x[static_cast<std::size_t>(i)], data.x[static_cast<std::size_t>(j)]), h.length_scale, h.signal_var);
    k(i, i) += h.noise_var + 1e-8;
    ks(i) = matern(dist2(data.x[static_cast<std::size_t>(i)], x), h.length_scale, h.signal_var);
  }
  const Eigen::MatrixXd kinv = k.inverse();
  const double mu = ks.dot(kinv * y);
  const double var = h.signal_var - ks.dot(kinv * ks);
  return {mean + sd * mu, sd * std::sqrt(std::max(var, 0.0))};
}

Dataset wavy_data(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = testing::random_point(rng, d);
    double y = 0.0;
    for (std::size_t k = 0; k < d; ++k) y += std::sin(3.0 * x[k] + static_cast<double>(k));
    data.add(x, 10.0 + y);
  }
  return data;
}

}  // namespace

TEST_SUITE("gp") {
  TEST_CASE("posterior agrees with a dense reference solve") {
    const auto data = wavy_data(15, 3, 4);
    const GpHyperparameters h{0.7, 1.3, 1e-3};
    const GpSurrogate gp(data, KernelType::matern52, h);
    CHECK(gp.jitter() == 1e-8);
    Rng rng(8);
    for (int t = 0; t < 10; ++t) {
      const auto x = testing::random_point(rng, 3);
      const auto got = gp.posterior(x);
      const auto want = dense_posterior(data, h, x);
      CHECK(got.mean == doctest::Approx(want.mean).epsilon(1e-8));
      CHECK(got.sd * got.sd == doctest::Approx(want.sd * want.sd).epsilon(1e-6));
    }
  }

  TEST_CASE("kernel values") {
    const GpHyperparameters h{2.0, 3.0, 0.0};
    CHECK(kernel_value(KernelType::matern52, h, 0.0) == 3.0);
    CHECK(kernel_value(KernelType::squared_exponential, h, 0.0) == 3.0);
    CHECK(kernel_value(KernelType::squared_exponential, h, 4.0) == doctest::Approx(3.0 * std::exp(-0.5)));
    CHECK(kernel_value(KernelType::matern52, h, 1.0) == doctest::Approx(matern(1.0, 2.0, 3.0)).epsilon(1e-14));
    CHECK(kernel_type_from_string("matern52") == KernelType::matern52);
    CHECK_THROWS_AS(kernel_type_from_string("rbf2"), Error);
  }

  TEST_CASE("property: near-noiseless posterior interpolates the data") {
    const auto data = wavy_data(12, 2, 1);
    const GpSurrogate gp(data, KernelType::matern52, {0.5, 1.0, 1e-8});
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto p = gp.posterior(data.x[i]);
      CHECK(p.mean == doctest::Approx(data.y[i]).epsilon(1e-4));
      CHECK(p.sd < 1e-2);
    }
  }

  TEST_CASE("far from the data the posterior reverts to the prior") {
    const auto data = wavy_data(10, 2, 2);
    const GpSurrogate gp(data, KernelType::matern52, {0.3, 1.0, 1e-6});
    const auto p = gp.posterior(std::vector<double>{25.0, -25.0});
    CHECK(p.mean == doctest::Approx(gp.target_mean()).epsilon(1e-6));
    CHECK(p.sd == doctest::Approx(gp.target_sd()).epsilon(0.05));
  }

  TEST_CASE("duplicate rows are merged by averaging") {
    Dataset data;
    data.add(std::vector<double>{0.2}, 1.0);
    data.add(std::vector<double>{0.2}, 3.0);
    data.add(std::vector<double>{0.8}, 5.0);
    const GpSurrogate gp(data, KernelType::matern52, {0.3, 1.0, 1e-8});
    CHECK(gp.size() == 2);
    CHECK(gp.posterior(std::vector<double>{0.2}).mean == doctest::Approx(2.0).epsilon(1e-6));
  }

  TEST_CASE("constant targets fit and predict the constant") {
    Dataset data;
    Rng rng(3);
    for (int i = 0; i < 6; ++i) data.add(testing::random_point(rng, 2), 7.5);
    const auto gp = gp_fit(data, {}, 1);
    CHECK(gp.posterior(std::vector<double>{0.3, 0.6}).mean == doctest::Approx(7.5));
  }

  TEST_CASE("fitted surrogate tracks sin(2 pi x)") {
    Dataset data;
    for (int i = 0; i < 20; ++i) {
      const double x = (i + 0.5) / 20.0;
      data.add(std::vector<double>{x}, std::sin(2.0 * std::numbers::pi * x));
    }
    const auto gp = gp_fit(data, {}, 5);
    double se = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double x = i / 100.0;
      const double err = gp.posterior(std::vector<double>{x}).mean - std::sin(2.0 * std::numbers::pi * x);
      se += err * err;
    }
    CHECK(std::sqrt(se / 101.0) < 0.05);
  }

  TEST_CASE("property: fitting is deterministic and respects the bounds") {
    const auto data = wavy_data(20, 3, 6);
    GpOptions options;
    const auto a = gp_fit(data, options, 9);
    const auto b = gp_fit(data, options, 9);
    CHECK(a.hyperparameters().length_scale == b.hyperparameters().length_scale);
    CHECK(a.hyperparameters().noise_var == b.hyperparameters().noise_var);
    const auto& h = a.hyperparameters();
    CHECK(h.length_scale >= options.bounds.length_scale_lo * (1.0 - 1e-12));
    CHECK(h.length_scale <= options.bounds.length_scale_hi * (1.0 + 1e-12));
    CHECK(h.noise_var >= options.bounds.noise_var_lo * (1.0 - 1e-12));
    CHECK(h.noise_var <= options.bounds.noise_var_hi * (1.0 + 1e-12));
    const GpSurrogate fixed(data, options.kernel, {0.5, 1.0, 1e-6});
    CHECK(a.log_marginal_likelihood() >= fixed.log_marginal_likelihood() - 1e-9);
  }

  TEST_CASE("wrong query dimension and bad hyperparameters are rejected") {
    const auto data = wavy_data(5, 2, 1);
    const GpSurrogate gp(data, KernelType::matern52, {});
    CHECK_THROWS_AS(gp.posterior(std::vector<double>{0.5}), Error);
    CHECK_THROWS_AS(GpSurrogate(data, KernelType::matern52, {-1.0, 1.0, 0.0}), Error);
  }

  TEST_CASE("json export names the kernel and hyperparameters") {
    const GpSurrogate gp(wavy_data(5, 2, 1), KernelType::squared_exponential, {0.4, 2.0, 1e-4});
    const auto doc = gp_to_json(gp);
    CHECK(doc.dump().find("squared_exponential") != std::string::npos);
    CHECK(doc.dump().find("length_scale") != std::string::npos);
  }
}
