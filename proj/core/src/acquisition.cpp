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

#include "flagtune/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "flagtune/error.hpp"
#include "flagtune/sampling.hpp"

namespace flagtune {

std::string_view to_string(Direction direction) noexcept {
  return direction == Direction::minimize ? "minimize" : "maximize";
}

Direction direction_from_string(std::string_view text) {
  if (text == "minimize" || text == "min") return Direction::minimize;
  if (text == "maximize" || text == "max") return Direction::maximize;
  fail(ErrorKind::parse, "unknown direction '" + std::string(text) + "'");
}

double expected_improvement(double mu, double sigma, double f_best, double xi, Direction direction) {
  const double gain = direction == Direction::maximize ? mu - f_best - xi : f_best - mu - xi;
  if (!(sigma > 0.0)) return std::max(0.0, gain);
  const double z = gain / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, gain * cdf + sigma * pdf);
}

namespace {

// Golden-section search for the maximum of g on [0, 1].
std::pair<double, double> golden_max(const std::function<double(double)>& g, double tolerance) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double gc = g(c), gd = g(d);
  while (b - a > tolerance) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - ratio * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + ratio * (b - a);
      gd = g(d);
    }
  }
  return gc >= gd ? std::pair{c, gc} : std::pair{d, gd};
}

}  // namespace

std::vector<double> maximize_acquisition(const AcquisitionFn& acquisition, std::size_t dimension,
                                         const AcquisitionOptions& options, std::uint64_t seed) {
  require(dimension >= 1, "maximize_acquisition: zero dimensions");
  require(options.candidates >= 1, "maximize_acquisition: need at least one candidate");
  auto candidates = sobol_shifted(options.candidates, dimension, seed);
  std::vector<double> scores(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) scores[i] = acquisition(candidates[i]);

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  std::vector<double> best = candidates[order.front()];
  double best_score = scores[order.front()];
  const std::size_t top = std::min(options.refine_top, order.size());
  for (std::size_t t = 0; t < top; ++t) {
    auto x = candidates[order[t]];
    double score = scores[order[t]];
    for (int pass = 0; pass < options.passes; ++pass) {
      for (std::size_t j = 0; j < dimension; ++j) {
        const double keep = x[j];
        auto along = [&](double v) {
          x[j] = v;
          return acquisition(x);
        };
        auto [v, s] = golden_max(along, options.tolerance);
        if (s > score) {
          x[j] = v;
          score = s;
        } else {
          x[j] = keep;
        }
      }
    }
    if (score > best_score) {
      best_score = score;
      best = x;
    }
  }
  return best;
}

}  // namespace flagtune
