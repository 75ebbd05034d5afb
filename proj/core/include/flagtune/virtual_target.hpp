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

// Synthetic objective with a known optimum and a known set of relevant
// dimensions. Stands in for a real target in tests and demos.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace flagtune {

// value(x) = base + sum_{i in relevant} weight_i * (x_i - center_i)^2 + noise
struct VirtualTarget {
  std::size_t dimension = 0;
  std::vector<std::size_t> relevant;
  std::vector<double> centers;
  std::vector<double> weights;
  double noise_sd = 0.0;
  double base = 1.0;

  void validate() const;
  double optimum() const noexcept { return base; }
  // Noise-free value.
  double mean(std::span<const double> x) const;
};

// Noise is a deterministic function of (seed, x).
double synthetic_eval(const VirtualTarget& target, std::span<const double> x, std::uint64_t seed);

}  // namespace flagtune
