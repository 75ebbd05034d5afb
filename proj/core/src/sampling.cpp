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

#include "flagtune/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "flagtune/error.hpp"
#include "flagtune/random.hpp"
#include "sobol_direction_numbers.hpp"

namespace flagtune {

std::size_t sobol_max_dimension() noexcept { return detail::kSobolMaxDimension; }

SobolSequence::SobolSequence(std::size_t dimension)
    : dimension_(dimension), directions_(dimension * 32), state_(dimension, 0) {
  require(dimension >= 1, "sobol: dimension must be at least 1");
  if (dimension > detail::kSobolMaxDimension)
    fail(ErrorKind::invalid_argument, "sobol: dimension " + std::to_string(dimension) +
                                          " exceeds the direction-number table (" +
                                          std::to_string(detail::kSobolMaxDimension) + ")");
  for (std::size_t k = 0; k < 32; ++k) directions_[k] = 1u << (31 - k);
  for (std::size_t j = 1; j < dimension; ++j) {
    const auto& poly = detail::kSobolTable[j - 1];
    const std::uint32_t s = poly.degree;
    std::uint32_t* v = directions_.data() + j * 32;
    for (std::uint32_t k = 0; k < std::min<std::uint32_t>(s, 32); ++k) v[k] = poly.initial[k] << (31 - k);
    for (std::uint32_t k = s; k < 32; ++k) {
      v[k] = v[k - s] ^ (v[k - s] >> s);
      for (std::uint32_t l = 1; l < s; ++l)
        if ((poly.coefficients >> (s - 1 - l)) & 1u) v[k] ^= v[k - l];
    }
  }
}

std::vector<double> SobolSequence::next() {
  std::vector<double> point(dimension_);
  for (std::size_t j = 0; j < dimension_; ++j) point[j] = static_cast<double>(state_[j]) * 0x1.0p-32;
  skip(1);
  return point;
}

void SobolSequence::skip(std::size_t count) {
  for (std::size_t c = 0; c < count; ++c) {
    ++index_;
    const auto bit = static_cast<std::size_t>(std::countr_zero(index_));
    require(bit < 32, "sobol: sequence exhausted");
    for (std::size_t j = 0; j < dimension_; ++j) state_[j] ^= directions_[j * 32 + bit];
  }
}

PointSet sobol(std::size_t n, std::size_t d, bool skip_zero) {
  require(n >= 1, "sobol: n must be at least 1");
  SobolSequence seq(d);
  if (skip_zero) seq.skip(1);
  PointSet points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) points.push_back(seq.next());
  return points;
}

PointSet sobol_shifted(std::size_t n, std::size_t d, std::uint64_t seed) {
  require(n >= 1, "sobol: n must be at least 1");
  SobolSequence seq(d);
  Rng rng(seed);
  std::vector<std::uint32_t> shift(d);
  for (auto& s : shift) s = static_cast<std::uint32_t>(rng() >> 32);
  PointSet points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = seq.next();
    for (std::size_t j = 0; j < d; ++j) {
      const auto bits = static_cast<std::uint32_t>(p[j] * 0x1.0p32) ^ shift[j];
      p[j] = static_cast<double>(bits) * 0x1.0p-32;
    }
    points.push_back(std::move(p));
  }
  return points;
}

PointSet lhs(std::size_t n, std::size_t d, std::uint64_t seed) {
  require(n >= 1, "lhs: n must be at least 1");
  Rng rng(seed);
  PointSet points(n, std::vector<double>(d));
  std::vector<std::size_t> strata(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      double u = 0.0;
      while (u == 0.0) u = uniform01(rng);
      const double x = (static_cast<double>(strata[i]) + u) / static_cast<double>(n);
      // Guard the rounding case (k + u) / n == 1.
      points[i][j] = std::min(x, std::nextafter((static_cast<double>(strata[i]) + 1.0) / static_cast<double>(n), 0.0));
    }
  }
  return points;
}

}  // namespace flagtune
