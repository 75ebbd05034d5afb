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

#include "flagtune/linreg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "flagtune/error.hpp"
#include "flagtune/random.hpp"

namespace flagtune {
namespace {

void check_input(const FeatureMap& map, std::span<const double> x) {
  require(x.size() == map.input_dim, "model expects " + std::to_string(map.input_dim) +
                                         " inputs, got " + std::to_string(x.size()));
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

void FeatureMap::validate() const {
  require(degree == 1 || degree == 2, "unsupported polynomial degree " + std::to_string(degree));
}

std::size_t FeatureMap::size() const {
  validate();
  const std::size_t d = input_dim;
  if (degree == 1) return 1 + d;
  return 1 + 2 * d + (interactions ? d * (d - (d > 0 ? 1 : 0)) / 2 : 0);
}

void FeatureMap::expand(std::span<const double> x, std::span<double> out) const {
  check_input(*this, x);
  require(out.size() == size(), "feature buffer has the wrong length");
  const std::size_t d = input_dim;
  out[0] = 1.0;
  std::copy(x.begin(), x.end(), out.begin() + 1);
  if (degree == 1) return;
  for (std::size_t i = 0; i < d; ++i) out[1 + d + i] = x[i] * x[i];
  if (!interactions) return;
  std::size_t k = 1 + 2 * d;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) out[k++] = x[i] * x[j];
}

std::vector<double> FeatureMap::operator()(std::span<const double> x) const {
  std::vector<double> out(size());
  expand(x, out);
  return out;
}

std::vector<double> poly_features(std::span<const double> x, int degree, bool interactions) {
  return FeatureMap{x.size(), degree, interactions}(x);
}

// ---------------------------------------------------------------------------

LinearModel::LinearModel(FeatureMap map, std::vector<double> weights, double target_mean, double target_sd)
    : map_(map), weights_(std::move(weights)), mean_(target_mean), sd_(target_sd) {
  require(weights_.size() == map_.size(), "weight vector length does not match the feature map");
  require(sd_ > 0.0 && std::isfinite(sd_) && std::isfinite(mean_), "invalid target standardization");
}

double LinearModel::predict_standardized(std::span<const double> x) const {
  return dot(weights_, map_(x));
}

std::vector<double> LinearModel::loss_gradient(std::span<const double> x, double label) const {
  auto phi = map_(x);
  const double residual = dot(weights_, phi) - standardize(label);
  for (auto& v : phi) v *= residual;
  return phi;
}

void LinearModel::step_towards(std::span<const double> x, double standardized_target, double learning_rate) {
  const auto phi = map_(x);
  const double residual = dot(weights_, phi) - standardized_target;
  for (std::size_t k = 0; k < phi.size(); ++k) weights_[k] -= learning_rate * residual * phi[k];
}

// ---------------------------------------------------------------------------

LinearModel fit_sgd(const Dataset& data, const FeatureMap& map, const SgdParams& params, SgdTrace* trace) {
  const std::size_t n = data.size();
  require(n >= 2, "fit_sgd needs at least 2 samples");
  require(data.x.size() == n, "fit_sgd: inputs and targets differ in length");
  require(params.learning_rate > 0.0 && params.epochs >= 0 && params.batch_size >= 1 &&
              params.lr_decay >= 0.0,
          "fit_sgd: invalid hyperparameters");
  for (double y : data.y) require(std::isfinite(y), "fit_sgd: non-finite target");
  map.validate();

  const double mean = std::accumulate(data.y.begin(), data.y.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double y : data.y) var += (y - mean) * (y - mean);
  double sd = std::sqrt(var / static_cast<double>(n));
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) sd = 1.0;

  const std::size_t p = map.size();
  std::vector<double> features(n * p);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    map.expand(data.x[i], std::span<double>(features.data() + i * p, p));
    targets[i] = (data.y[i] - mean) / sd;
  }

  std::vector<double> w(p, 0.0), grad(p);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(params.seed);
  auto row = [&](std::size_t i) { return std::span<const double>(features.data() + i * p, p); };

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = params.learning_rate / (1.0 + params.lr_decay * epoch);
    for (std::size_t start = 0; start < n; start += params.batch_size) {
      const std::size_t stop = std::min(n, start + params.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const auto phi = row(order[b]);
        const double residual = dot(w, phi) - targets[order[b]];
        for (std::size_t k = 0; k < p; ++k) grad[k] += residual * phi[k];
      }
      const double scale = lr / static_cast<double>(stop - start);
      for (std::size_t k = 0; k < p; ++k) w[k] -= scale * grad[k];
    }
    if (trace != nullptr) {
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = dot(w, row(i)) - targets[i];
        loss += r * r;
      }
      trace->epoch_loss.push_back(loss / static_cast<double>(n));
    }
  }
  for (double v : w)
    if (!std::isfinite(v)) fail(ErrorKind::numerical, "fit_sgd diverged; lower the learning rate");
  return LinearModel(map, std::move(w), mean, sd);
}

ModelEnsemble bootstrap_ensemble(const Dataset& data, std::size_t members, const FeatureMap& map,
                                 const SgdParams& params, std::uint64_t seed) {
  require(members >= 2, "an ensemble needs at least 2 members");
  require(data.size() >= 2, "bootstrap_ensemble needs at least 2 samples");
  ModelEnsemble ensemble;
  ensemble.members.reserve(members);
  const std::size_t n = data.size();
  for (std::size_t z = 0; z < members; ++z) {
    Rng rng(derive_seed(seed, z));
    Dataset resample;
    resample.x.reserve(n);
    resample.y.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto pick = static_cast<std::size_t>(rng() % n);
      resample.add(data.x[pick], data.y[pick]);
    }
    SgdParams member = params;
    member.seed = derive_seed(seed, members + z);
    ensemble.members.push_back(fit_sgd(resample, map, member));
  }
  return ensemble;
}

double rmse(const LinearModel& model, const Dataset& data) {
  require(!data.empty(), "rmse of an empty dataset");
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = model.predict(data.x[i]) - data.y[i];
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(data.size()));
}

nlohmann::json model_to_json(const LinearModel& model) {
  const auto& map = model.feature_map();
  nlohmann::json doc;
  doc["feature_map"] = {{"input_dim", map.input_dim}, {"degree", map.degree}, {"interactions", map.interactions}};
  doc["weights"] = std::vector<double>(model.weights().begin(), model.weights().end());
  doc["target_mean"] = model.target_mean();
  doc["target_sd"] = model.target_sd();
  return doc;
}

LinearModel model_from_json(const nlohmann::json& doc) {
  FeatureMap map;
  const auto& fm = doc.at("feature_map");
  map.input_dim = fm.at("input_dim").get<std::size_t>();
  map.degree = fm.at("degree").get<int>();
  map.interactions = fm.at("interactions").get<bool>();
  return LinearModel(map, doc.at("weights").get<std::vector<double>>(), doc.at("target_mean").get<double>(),
                     doc.at("target_sd").get<double>());
}

}  // namespace flagtune
