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

// Polynomial-feature linear regression trained by stochastic gradient
// descent, plus bootstrap ensembles of such models.
//
// Targets are standardized before training; weights live on the
// standardized scale and predict() maps back to original units. Inputs are
// expected to already be in the unit hypercube and are not rescaled.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flagtune/dataset.hpp"

namespace flagtune {

struct FeatureMap {
  std::size_t input_dim = 0;
  int degree = 2;             // 1 or 2
  bool interactions = false;  // degree 2 only: add x_i * x_j, i < j

  void validate() const;
  std::size_t size() const;
  // [1, x_1..x_d] then x_i^2, then x_i x_j (i < j) when enabled.
  void expand(std::span<const double> x, std::span<double> out) const;
  std::vector<double> operator()(std::span<const double> x) const;

  bool operator==(const FeatureMap&) const = default;
};

std::vector<double> poly_features(std::span<const double> x, int degree, bool interactions);

struct SgdParams {
  double learning_rate = 0.01;
  int epochs = 200;
  std::size_t batch_size = 32;
  // Step size in epoch e is learning_rate / (1 + lr_decay * e).
  double lr_decay = 0.0;
  std::uint64_t seed = 0;
};

class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(FeatureMap map, std::vector<double> weights, double target_mean = 0.0, double target_sd = 1.0);

  const FeatureMap& feature_map() const noexcept { return map_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double target_mean() const noexcept { return mean_; }
  double target_sd() const noexcept { return sd_; }

  double standardize(double y) const noexcept { return (y - mean_) / sd_; }
  double destandardize(double z) const noexcept { return z * sd_ + mean_; }

  // W . phi(x), standardized scale.
  double predict_standardized(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return destandardize(predict_standardized(x)); }

  // Gradient of 0.5 * (f(x) - y)^2 with respect to W, i.e. (f(x) - y) phi(x),
  // with y given in original units and the residual taken on the
  // standardized scale.
  std::vector<double> loss_gradient(std::span<const double> x, double label) const;

  // One plain SGD step towards a standardized target.
  void step_towards(std::span<const double> x, double standardized_target, double learning_rate);

 private:
  FeatureMap map_;
  std::vector<double> weights_;
  double mean_ = 0.0;
  double sd_ = 1.0;
};

// Mean squared error on the training set (standardized scale) after each epoch.
struct SgdTrace {
  std::vector<double> epoch_loss;
};

// Minibatch SGD from zero weights; shuffling driven by params.seed.
LinearModel fit_sgd(const Dataset& data, const FeatureMap& map, const SgdParams& params,
                    SgdTrace* trace = nullptr);

struct ModelEnsemble {
  std::vector<LinearModel> members;

  std::size_t size() const noexcept { return members.size(); }
};

// Z members, each fit on a with-replacement resample of data.
ModelEnsemble bootstrap_ensemble(const Dataset& data, std::size_t members, const FeatureMap& map,
                                 const SgdParams& params, std::uint64_t seed);

double rmse(const LinearModel& model, const Dataset& data);

nlohmann::json model_to_json(const LinearModel& model);
LinearModel model_from_json(const nlohmann::json& doc);

}  // namespace flagtune
