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

// Space-filling designs over the unit hypercube.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace flagtune {

using PointSet = std::vector<std::vector<double>>;

// Highest dimension the bundled direction numbers support.
std::size_t sobol_max_dimension() noexcept;

// Unscrambled Sobol points in Gray-code order. Index 0 (the origin) is
// dropped unless skip_zero is false.
class SobolSequence {
 public:
  explicit SobolSequence(std::size_t dimension);

  std::size_t dimension() const noexcept { return dimension_; }
  // Point at the current index, then advance.
  std::vector<double> next();
  void skip(std::size_t count);

 private:
  std::size_t dimension_;
  std::vector<std::uint32_t> directions_;  // dimension_ x 32
  std::vector<std::uint32_t> state_;
  std::uint64_t index_ = 0;
};

PointSet sobol(std::size_t n, std::size_t d, bool skip_zero = true);

// Sobol points with a seeded random digital shift; a fresh low-discrepancy
// design per seed.
PointSet sobol_shifted(std::size_t n, std::size_t d, std::uint64_t seed);

// One point per stratum per dimension, strata order shuffled per dimension.
PointSet lhs(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace flagtune
