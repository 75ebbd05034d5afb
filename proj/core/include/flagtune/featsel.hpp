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

// Lasso-based flag selection.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flagtune/dataset.hpp"
#include "flagtune/flagspace.hpp"

namespace flagtune {

// per_sample: (1/2n)||y - Xw||^2 + lambda ||w||_1
// unscaled:   ||y - Xw||^2 + lambda ||w||_1
enum class LassoScaling { per_sample, unscaled };

struct LassoOptions {
  double lambda = 0.01;
  double tolerance = 1e-6;
  int max_sweeps = 1000;
  LassoScaling scaling = LassoScaling::per_sample;
};

// Weights are on the original target scale; fitting itself runs against
// the standardized target with an unpenalized intercept.
struct LassoFit {
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;
  int sweeps = 0;
  bool converged = false;
  // Objective after each sweep, standardized-target scale.
  std::vector<double> objective;

  std::size_t support_size(double threshold = 0.0) const;
};

LassoFit fit_lasso(const Dataset& data, const LassoOptions& options = {});

// Largest lambda that still leaves a nonzero weight (per_sample scaling).
double lambda_max(const Dataset& data);

// k-fold cross-validated MSE per grid value; ties go to the smaller lambda.
double grid_search_lambda(const Dataset& data, std::vector<double> grid, std::size_t folds,
                          std::uint64_t seed, const LassoOptions& base = {});

struct FlagSubset {
  std::vector<std::string> names;
  std::string parent;  // FlagSpace::fingerprint()
  bool fallback = false;
};

// Flags with |w| > threshold in space order; when none survive, the top
// ceil(0.1 d) flags by |w| are returned and marked as a fallback.
FlagSubset select_flags(const LassoFit& fit, const FlagSpace& space, double threshold = 0.0);

nlohmann::json selection_report_to_json(const LassoFit& fit, const FlagSpace& space, const FlagSubset& subset);

}  // namespace flagtune
