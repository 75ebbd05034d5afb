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

#include "flagtune/featsel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "flagtune/error.hpp"
#include "flagtune/random.hpp"

namespace flagtune {
namespace {

double soft_threshold(double value, double lambda) {
  if (value > lambda) return value - lambda;
  if (value < -lambda) return value + lambda;
  return 0.0;
}

// Centered design (column-major) and standardized target.
struct Standardized {
  std::size_t n = 0, d = 0;
  std::vector<double> columns;
  std::vector<double> column_mean;
  std::vector<double> column_sq;  // (1/n) ||x_j - mean_j||^2
  std::vector<double> y;
  double y_mean = 0.0, y_sd = 1.0;

  std::span<const double> column(std::size_t j) const { return {columns.data() + j * n, n}; }
};

Standardized standardize(const Dataset& data) {
  Standardized s;
  s.n = data.size();
  require(s.n >= 2, "lasso needs at least 2 samples");
  require(data.x.size() == s.n, "lasso: inputs and targets differ in length");
  s.d = data.dimension();
  s.columns.resize(s.n * s.d);
  s.column_mean.assign(s.d, 0.0);
  s.column_sq.assign(s.d, 0.0);
  const double inv_n = 1.0 / static_cast<double>(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    require(data.x[i].size() == s.d, "lasso: ragged design matrix");
    require(std::isfinite(data.y[i]), "lasso: non-finite target");
    for (std::size_t j = 0; j < s.d; ++j) {
      require(std::isfinite(data.x[i][j]), "lasso: non-finite feature");
      s.column_mean[j] += data.x[i][j] * inv_n;
    }
  }
  for (std::size_t j = 0; j < s.d; ++j) {
    for (std::size_t i = 0; i < s.n; ++i) {
      const double c = data.x[i][j] - s.column_mean[j];
      s.columns[j * s.n + i] = c;
      s.column_sq[j] += c * c * inv_n;
    }
  }
  s.y_mean = std::accumulate(data.y.begin(), data.y.end(), 0.0) * inv_n;
  double var = 0.0;
  for (double y : data.y) var += (y - s.y_mean) * (y - s.y_mean) * inv_n;
  s.y_sd = std::sqrt(var);
  if (!(s.y_sd > 1e-12 * std::max(1.0, std::abs(s.y_mean)))) s.y_sd = 1.0;
  s.y.resize(s.n);
  for (std::size_t i = 0; i < s.n; ++i) s.y[i] = (data.y[i] - s.y_mean) / s.y_sd;
  return s;
}

// Columns whose centered variance is this small are treated as constant.
constexpr double kConstantColumn = 1e-14;

}  // namespace

std::size_t LassoFit::support_size(double threshold) const {
  return static_cast<std::size_t>(
      std::count_if(weights.begin(), weights.end(), [&](double w) { return std::abs(w) > threshold; }));
}

double lambda_max(const Dataset& data) {
  const auto s = standardize(data);
  double best = 0.0;
  for (std::size_t j = 0; j < s.d; ++j) {
    const auto col = s.column(j);
    const double corr = std::inner_product(col.begin(), col.end(), s.y.begin(), 0.0) / static_cast<double>(s.n);
    best = std::max(best, std::abs(corr));
  }
  return best;
}

LassoFit fit_lasso(const Dataset& data, const LassoOptions& options) {
  require(options.lambda >= 0.0 && std::isfinite(options.lambda), "lasso lambda must be finite and >= 0");
  require(options.tolerance > 0.0 && options.max_sweeps >= 1, "invalid lasso convergence settings");
  const auto s = standardize(data);
  const double n = static_cast<double>(s.n);
  // The unscaled objective is the per-sample one with lambda / 2n.
  const double lambda = options.scaling == LassoScaling::per_sample ? options.lambda : options.lambda / (2.0 * n);

  std::vector<double> w(s.d, 0.0);
  std::vector<double> residual = s.y;
  auto objective = [&] {
    double rss = 0.0;
    for (double r : residual) rss += r * r;
    double l1 = 0.0;
    for (double v : w) l1 += std::abs(v);
    return rss / (2.0 * n) + lambda * l1;
  };

  LassoFit fit;
  fit.lambda = options.lambda;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < s.d; ++j) {
      if (s.column_sq[j] < kConstantColumn) continue;
      const auto col = s.column(j);
      const double old = w[j];
      double rho = 0.0;
      for (std::size_t i = 0; i < s.n; ++i) rho += col[i] * residual[i];
      rho = rho / n + s.column_sq[j] * old;
      const double updated = soft_threshold(rho, lambda) / s.column_sq[j];
      const double delta = updated - old;
      if (delta != 0.0) {
        for (std::size_t i = 0; i < s.n; ++i) residual[i] -= delta * col[i];
        w[j] = updated;
      }
      max_change = std::max(max_change, std::abs(delta));
    }
    fit.objective.push_back(objective());
    fit.sweeps = sweep + 1;
    if (max_change < options.tolerance) {
      fit.converged = true;
      break;
    }
  }

  fit.weights.resize(s.d);
  fit.intercept = s.y_mean;
  for (std::size_t j = 0; j < s.d; ++j) {
    fit.weights[j] = w[j] * s.y_sd;
    fit.intercept -= fit.weights[j] * s.column_mean[j];
  }
  return fit;
}

double grid_search_lambda(const Dataset& data, std::vector<double> grid, std::size_t folds, std::uint64_t seed,
                          const LassoOptions& base) {
  require(!grid.empty(), "lambda grid is empty");
  require(folds >= 2, "cross-validation needs at least 2 folds");
  require(data.size() >= folds, "fewer samples than folds");
  std::sort(grid.begin(), grid.end());

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Dataset> train(folds), held(folds);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t i = order[pos];
    for (std::size_t f = 0; f < folds; ++f) {
      auto& target = (pos % folds == f) ? held[f] : train[f];
      target.add(data.x[i], data.y[i]);
    }
  }

  double best_lambda = grid.front();
  double best_error = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    LassoOptions options = base;
    options.lambda = lambda;
    double error = 0.0;
    std::size_t count = 0;
    for (std::size_t f = 0; f < folds; ++f) {
      const auto fit = fit_lasso(train[f], options);
      for (std::size_t i = 0; i < held[f].size(); ++i) {
        const auto& x = held[f].x[i];
        const double pred = fit.intercept + std::inner_product(x.begin(), x.end(), fit.weights.begin(), 0.0);
        error += (pred - held[f].y[i]) * (pred - held[f].y[i]);
        ++count;
      }
    }
    error /= static_cast<double>(count);
    if (error < best_error) {
      best_error = error;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

FlagSubset select_flags(const LassoFit& fit, const FlagSpace& space, double threshold) {
  const std::size_t d = space.dimension();
  require(fit.weights.size() == d, "lasso fit has " + std::to_string(fit.weights.size()) +
                                       " weights for a space of dimension " + std::to_string(d));
  FlagSubset subset;
  subset.parent = space.fingerprint();
  std::vector<bool> keep(d, false);
  for (std::size_t j = 0; j < d; ++j) keep[j] = std::abs(fit.weights[j]) > threshold;
  if (std::none_of(keep.begin(), keep.end(), [](bool k) { return k; }) && d > 0) {
    subset.fallback = true;
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return std::abs(fit.weights[a]) > std::abs(fit.weights[b]); });
    const auto count = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(d)));
    for (std::size_t k = 0; k < count; ++k) keep[order[k]] = true;
  }
  for (std::size_t j = 0; j < d; ++j)
    if (keep[j]) subset.names.push_back(space.active_flag(j).name);
  return subset;
}

nlohmann::json selection_report_to_json(const LassoFit& fit, const FlagSpace& space, const FlagSubset& subset) {
  nlohmann::json weights = nlohmann::json::object();
  for (std::size_t j = 0; j < fit.weights.size(); ++j) weights[space.active_flag(j).name] = fit.weights[j];
  nlohmann::json doc;
  doc["lambda"] = fit.lambda;
  doc["intercept"] = fit.intercept;
  doc["sweeps"] = fit.sweeps;
  doc["converged"] = fit.converged;
  doc["support_size"] = fit.support_size();
  doc["selected"] = subset.names;
  doc["fallback"] = subset.fallback;
  doc["space_fingerprint"] = subset.parent;
  doc["weights"] = std::move(weights);
  return doc;
}

}  // namespace flagtune
