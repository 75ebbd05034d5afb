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

// Expected improvement and its maximization over the unit hypercube.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "flagtune/objective.hpp"

namespace flagtune {

// Closed-form EI of a Gaussian N(mu, sigma^2) over the incumbent f_best
// with margin xi. For minimization the improvement is f_best - mu - xi.
double expected_improvement(double mu, double sigma, double f_best, double xi = 0.01,
                            Direction direction = Direction::maximize);

struct AcquisitionOptions {
  std::size_t candidates = 1024;
  std::size_t refine_top = 10;
  int passes = 2;  // coordinate-wise golden-section sweeps per refined point
  double tolerance = 1e-3;
};

using AcquisitionFn = std::function<double(std::span<const double>)>;

// Scores a fresh shifted-Sobol candidate set, refines the best few with
// coordinate golden-section sweeps and returns the overall best point.
std::vector<double> maximize_acquisition(const AcquisitionFn& acquisition, std::size_t dimension,
                                         const AcquisitionOptions& options, std::uint64_t seed);

}  // namespace flagtune
