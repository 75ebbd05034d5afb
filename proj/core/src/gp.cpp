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

#include "flagtune/gp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "flagtune/error.hpp"
#include "flagtune/random.hpp"

namespace flagtune {
namespace {

constexpr std::array<double, 5> kJitterLadder = {1e-8, 1e-7, 1e-6, 1e-5, 1e-4};
const double kSqrt5 = std::sqrt(5.0);

struct Prepared {
  Eigen::MatrixXd x;        // n x d
  Eigen::VectorXd y;        // standardized
  Eigen::MatrixXd dist2;    // pairwise squared distances
  double y_mean = 0.0;
  double y_sd = 1.0;
};

Prepared prepare(const Dataset& data) {
  require(data.size() >= 1, "gp: no training data");
  const std::size_t d = data.dimension();
  require(d >= 1, "gp: zero-dimensional inputs");
  // Merge near-duplicate rows.
  std::vector<std::vector<double>> rows;
  std::vector<double> sums;
  std::vector<int> counts;
  for (std::size_t i = 0; i < data.size(); ++i) {
    require(data.x[i].size() == d, "gp: ragged inputs");
    require(std::isfinite(data.y[i]), "gp: non-finite target");
    std::size_t match = rows.size();
    for (std::size_t r = 0; r < rows.size() && match == rows.size(); ++r) {
      double dist2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) dist2 += (rows[r][k] - data.x[i][k]) * (rows[r][k] - data.x[i][k]);
      if (dist2 < 1e-24) match = r;
    }
    if (match == rows.size()) {
      rows.push_back(data.x[i]);
      sums.push_back(data.y[i]);
      counts.push_back(1);
    } else {
      sums[match] += data.y[i];
      ++counts[match];
    }
  }
  Prepared p;
  const auto n = static_cast<Eigen::Index>(rows.size());
  p.x.resize(n, static_cast<Eigen::Index>(d));
  p.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) p.x(i, static_cast<Eigen::Index>(k)) = rows[static_cast<std::size_t>(i)][k];
    p.y(i) = sums[static_cast<std::size_t>(i)] / counts[static_cast<std::size_t>(i)];
  }
  p.y_mean = p.y.mean();
  const double var = (p.y.array() - p.y_mean).square().mean();
  p.y_sd = std::sqrt(var);
  if (!(p.y_sd > 1e-12 * std::max(1.0, std::abs(p.y_mean)))) p.y_sd = 1.0;
  p.y = (p.y.array() - p.y_mean) / p.y_sd;
  p.dist2.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.dist2(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) p.dist2(i, j) = p.dist2(j, i) = (p.x.row(i) - p.x.row(j)).squaredNorm();
  }
  return p;
}

struct Factorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd alpha;
  double jitter = 0.0;
  double lml = -std::numeric_limits<double>::infinity();
};

bool factorize(const Prepared& p, KernelType kernel, const GpHyperparameters& h, Factorization& out) {
  const auto n = p.dist2.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i) k(i, j) = k(j, i) = kernel_value(kernel, h, p.dist2(i, j));
  for (double jitter : kJitterLadder) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += h.noise_var + jitter;
    out.llt.compute(kj);
    if (out.llt.info() != Eigen::Success) continue;
    bool positive = true;
    for (Eigen::Index i = 0; i < n && positive; ++i) positive = out.llt.matrixLLT()(i, i) > 0.0;
    if (!positive) continue;
    out.alpha = out.llt.solve(p.y);
    out.jitter = jitter;
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(out.llt.matrixLLT()(i, i));
    out.lml = -0.5 * p.y.dot(out.alpha) - log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return std::isfinite(out.lml);
  }
  return false;
}

using Theta = std::array<double, 3>;  // log length scale, log signal var, log noise var

GpHyperparameters from_theta(const Theta& t) { return {std::exp(t[0]), std::exp(t[1]), std::exp(t[2])}; }
Theta to_theta(const GpHyperparameters& h) { return {std::log(h.length_scale), std::log(h.signal_var), std::log(h.noise_var)}; }

// Bounded Nelder-Mead (projection onto the box), minimizing f.
template <typename F>
std::pair<Theta, double> nelder_mead(F&& f, Theta start, const Theta& lo, const Theta& hi, int max_evals) {
  auto clamp = [&](Theta t) {
    for (std::size_t k = 0; k < 3; ++k) t[k] = std::clamp(t[k], lo[k], hi[k]);
    return t;
  };
  std::array<Theta, 4> simplex;
  std::array<double, 4> values;
  simplex[0] = clamp(start);
  for (std::size_t k = 0; k < 3; ++k) {
    Theta t = simplex[0];
    const double step = 0.1 * (hi[k] - lo[k]);
    t[k] = t[k] + step <= hi[k] ? t[k] + step : t[k] - step;
    simplex[k + 1] = clamp(t);
  }
  int evals = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    values[i] = f(simplex[i]);
    ++evals;
  }
  while (evals < max_evals) {
    std::array<std::size_t, 4> order = {0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const auto best = order[0], worst = order[3], second = order[2];
    if (std::abs(values[worst] - values[best]) < 1e-9 * (1.0 + std::abs(values[best]))) break;
    Theta centroid{0, 0, 0};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t k = 0; k < 3; ++k) centroid[k] += simplex[order[i]][k] / 3.0;
    auto along = [&](double coeff) {
      Theta t;
      for (std::size_t k = 0; k < 3; ++k) t[k] = centroid[k] + coeff * (simplex[worst][k] - centroid[k]);
      return clamp(t);
    };
    const Theta reflected = along(-1.0);
    const double fr = f(reflected);
    ++evals;
    if (fr < values[best]) {
      const Theta expanded = along(-2.0);
      const double fe = f(expanded);
      ++evals;
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
    } else {
      const Theta contracted = fr < values[worst] ? along(-0.5) : along(0.5);
      const double fc = f(contracted);
      ++evals;
      if (fc < std::min(fr, values[worst])) {
        simplex[worst] = contracted;
        values[worst] = fc;
      } else {
        for (std::size_t i = 1; i < 4; ++i) {
          auto& t = simplex[order[i]];
          for (std::size_t k = 0; k < 3; ++k) t[k] = simplex[best][k] + 0.5 * (t[k] - simplex[best][k]);
          values[order[i]] = f(t);
          ++evals;
        }
      }
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  return {simplex[best], values[best]};
}

}  // namespace

std::string_view to_string(KernelType kernel) noexcept {
  return kernel == KernelType::matern52 ? "matern52" : "squared_exponential";
}

KernelType kernel_type_from_string(std::string_view text) {
  if (text == "matern52") return KernelType::matern52;
  if (text == "squared_exponential" || text == "se") return KernelType::squared_exponential;
  fail(ErrorKind::parse, "unknown kernel '" + std::string(text) + "'");
}

double kernel_value(KernelType kernel, const GpHyperparameters& h, double r2) {
  if (kernel == KernelType::squared_exponential)
    return h.signal_var * std::exp(-0.5 * r2 / (h.length_scale * h.length_scale));
  const double r = kSqrt5 * std::sqrt(r2) / h.length_scale;
  return h.signal_var * (1.0 + r + r * r / 3.0) * std::exp(-r);
}

struct GpSurrogate::Impl {
  Prepared data;
  KernelType kernel;
  GpHyperparameters hyper;
  Factorization fact;
};

GpSurrogate::GpSurrogate(const Dataset& data, KernelType kernel, const GpHyperparameters& hyper) {
  require(hyper.length_scale > 0.0 && hyper.signal_var > 0.0 && hyper.noise_var >= 0.0,
          "gp: hyperparameters must be positive");
  auto impl = std::make_shared<Impl>();
  impl->data = prepare(data);
  impl->kernel = kernel;
  impl->hyper = hyper;
  if (!factorize(impl->data, kernel, hyper, impl->fact))
    fail(ErrorKind::numerical, "gp: kernel matrix not positive definite after jitter 1e-4");
  impl_ = std::move(impl);
}

GpPrediction GpSurrogate::posterior(std::span<const double> x) const {
  const auto& p = impl_->data;
  require(static_cast<Eigen::Index>(x.size()) == p.x.cols(),
          "gp: expected " + std::to_string(p.x.cols()) + " dimensions, got " + std::to_string(x.size()));
  const Eigen::Map<const Eigen::RowVectorXd> point(x.data(), static_cast<Eigen::Index>(x.size()));
  const auto n = p.x.rows();
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i)
    k_star(i) = kernel_value(impl_->kernel, impl_->hyper, (p.x.row(i) - point).squaredNorm());
  const double mean = k_star.dot(impl_->fact.alpha);
  const Eigen::VectorXd v = impl_->fact.llt.matrixL().solve(k_star);
  const double var = impl_->hyper.signal_var - v.squaredNorm();
  return {p.y_mean + p.y_sd * mean, p.y_sd * std::sqrt(std::max(var, 0.0))};
}

double GpSurrogate::log_marginal_likelihood() const { return impl_->fact.lml; }
const GpHyperparameters& GpSurrogate::hyperparameters() const { return impl_->hyper; }
KernelType GpSurrogate::kernel() const { return impl_->kernel; }
std::size_t GpSurrogate::size() const { return static_cast<std::size_t>(impl_->data.x.rows()); }
std::size_t GpSurrogate::dimension() const { return static_cast<std::size_t>(impl_->data.x.cols()); }
double GpSurrogate::target_mean() const { return impl_->data.y_mean; }
double GpSurrogate::target_sd() const { return impl_->data.y_sd; }
double GpSurrogate::jitter() const { return impl_->fact.jitter; }

GpSurrogate gp_fit(const Dataset& data, const GpOptions& options, std::uint64_t seed) {
  require(data.size() >= 2, "gp_fit needs at least 2 samples");
  require(options.restarts >= 1, "gp_fit needs at least one restart");
  const auto& b = options.bounds;
  require(0.0 < b.length_scale_lo && b.length_scale_lo < b.length_scale_hi && 0.0 < b.signal_var_lo &&
              b.signal_var_lo < b.signal_var_hi && 0.0 < b.noise_var_lo && b.noise_var_lo < b.noise_var_hi,
          "gp_fit: invalid hyperparameter bounds");
  const Prepared prepared = prepare(data);
  const Theta lo = {std::log(b.length_scale_lo), std::log(b.signal_var_lo), std::log(b.noise_var_lo)};
  const Theta hi = {std::log(b.length_scale_hi), std::log(b.signal_var_hi), std::log(b.noise_var_hi)};

  auto negative_lml = [&](const Theta& t) {
    Factorization f;
    if (!factorize(prepared, options.kernel, from_theta(t), f)) return std::numeric_limits<double>::max();
    return -f.lml;
  };

  std::vector<Theta> starts;
  if (options.warm_start) starts.push_back(to_theta(*options.warm_start));
  // Deterministic first start near the middle of the box, then random ones.
  starts.push_back({std::log(0.5), 0.0, std::log(1e-3)});
  Rng rng(seed);
  while (static_cast<int>(starts.size()) < options.restarts + (options.warm_start ? 1 : 0)) {
    Theta t;
    for (std::size_t k = 0; k < 3; ++k) t[k] = lo[k] + uniform01(rng) * (hi[k] - lo[k]);
    starts.push_back(t);
  }

  Theta best{};
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    auto [theta, value] = nelder_mead(negative_lml, start, lo, hi, options.max_evaluations);
    if (value < best_value) {
      best_value = value;
      best = theta;
    }
  }
  if (!std::isfinite(best_value) || best_value == std::numeric_limits<double>::max())
    fail(ErrorKind::numerical, "gp_fit: no hyperparameters gave a positive definite kernel");
  return GpSurrogate(data, options.kernel, from_theta(best));
}

nlohmann::json gp_to_json(const GpSurrogate& gp) {
  const auto& h = gp.hyperparameters();
  return {{"kernel", to_string(gp.kernel())},
          {"length_scale", h.length_scale},
          {"signal_var", h.signal_var},
          {"noise_var", h.noise_var},
          {"jitter", gp.jitter()},
          {"log_marginal_likelihood", gp.log_marginal_likelihood()},
          {"n", gp.size()}};
}

}  // namespace flagtune
