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

// Gaussian-process regression over the unit hypercube.
//
// Targets are standardized internally. Hyperparameters (length scale,
// signal variance, noise variance) are fit by maximizing the log marginal
// likelihood with a multi-start bounded Nelder-Mead search in log space.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "flagtune/dataset.hpp"

namespace flagtune {

enum class KernelType { matern52, squared_exponential };

std::string_view to_string(KernelType kernel) noexcept;
KernelType kernel_type_from_string(std::string_view text);

struct GpHyperparameters {
  double length_scale = 0.5;
  double signal_var = 1.0;
  double noise_var = 1e-6;
};

// Isotropic kernel value at squared distance r2.
double kernel_value(KernelType kernel, const GpHyperparameters& hyper, double r2);

struct GpBounds {
  double length_scale_lo = 0.01, length_scale_hi = 20.0;
  double signal_var_lo = 0.01, signal_var_hi = 100.0;
  double noise_var_lo = 1e-8, noise_var_hi = 1.0;
};

struct GpOptions {
  KernelType kernel = KernelType::matern52;
  GpBounds bounds;
  int restarts = 5;
  int max_evaluations = 150;  // per local search
  // Extra local-search start, e.g. the previous iteration's optimum.
  std::optional<GpHyperparameters> warm_start;
};

struct GpPrediction {
  double mean = 0.0;
  double sd = 0.0;
};

class GpSurrogate {
 public:
  // Conditions on the data with fixed hyperparameters. Rows closer than
  // 1e-12 are merged (targets averaged).
  GpSurrogate(const Dataset& data, KernelType kernel, const GpHyperparameters& hyper);

  GpPrediction posterior(std::span<const double> x) const;
  double log_marginal_likelihood() const;

  const GpHyperparameters& hyperparameters() const;
  KernelType kernel() const;
  std::size_t size() const;
  std::size_t dimension() const;
  double target_mean() const;
  double target_sd() const;
  // Diagonal jitter the factorization needed beyond the noise variance.
  double jitter() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

GpSurrogate gp_fit(const Dataset& data, const GpOptions& options, std::uint64_t seed);

nlohmann::json gp_to_json(const GpSurrogate& gp);

}  // namespace flagtune
