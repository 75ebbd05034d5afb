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

#include "flagtune/virtual_target.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "flagtune/error.hpp"
#include "flagtune/random.hpp"

namespace flagtune {

void VirtualTarget::validate() const {
  require(relevant.size() <= dimension, "virtual target: more relevant dimensions than dimensions");
  require(centers.size() == relevant.size() && weights.size() == relevant.size(),
          "virtual target: centers and weights must match the relevant set");
  std::set<std::size_t> unique(relevant.begin(), relevant.end());
  require(unique.size() == relevant.size(), "virtual target: repeated relevant dimension");
  for (std::size_t k = 0; k < relevant.size(); ++k) {
    require(relevant[k] < dimension, "virtual target: relevant dimension out of range");
    require(centers[k] >= 0.0 && centers[k] <= 1.0, "virtual target: centers must lie in [0,1]");
    require(weights[k] > 0.0, "virtual target: weights must be positive");
  }
  require(noise_sd >= 0.0, "virtual target: noise_sd must be non-negative");
  require(base > 0.0, "virtual target: base must be positive");
}

double VirtualTarget::mean(std::span<const double> x) const {
  require(x.size() == dimension, "virtual target: expected " + std::to_string(dimension) +
                                     " dimensions, got " + std::to_string(x.size()));
  double value = base;
  for (std::size_t k = 0; k < relevant.size(); ++k) {
    const double delta = x[relevant[k]] - centers[k];
    value += weights[k] * delta * delta;
  }
  return value;
}

double synthetic_eval(const VirtualTarget& target, std::span<const double> x, std::uint64_t seed) {
  const double value = target.mean(x);
  if (target.noise_sd == 0.0) return value;
  std::uint64_t h = mix_seed(seed);
  for (double xi : x) h = mix_seed(h ^ std::bit_cast<std::uint64_t>(xi));
  // Box-Muller on two 53-bit uniforms; u1 in (0, 1].
  const double u1 = (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(mix_seed(h) >> 11) * 0x1.0p-53;
  const double normal = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return value + target.noise_sd * normal;
}

}  // namespace flagtune
