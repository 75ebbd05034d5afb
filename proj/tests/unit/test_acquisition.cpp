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

#include <doctest.h>

#include <cmath>

#include "flagtune/acquisition.hpp"
#include "flagtune/random.hpp"

using namespace flagtune;

TEST_SUITE("acquisition") {
  TEST_CASE("expected improvement reference values") {
    CHECK(expected_improvement(0.0, 1.0, 0.0, 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(expected_improvement(1.0, 0.5, 0.8, 0.01) == doctest::Approx(0.3087021252403239).epsilon(1e-12));
    CHECK(expected_improvement(0.2, 2.0, 1.0, 0.0) == doctest::Approx(0.460877673894906).epsilon(1e-12));
    CHECK(expected_improvement(-1.0, 0.3, 0.0, 0.1) == doctest::Approx(8.928166524578936e-06).epsilon(1e-9));
  }

  TEST_CASE("zero sigma gives the plain improvement") {
    CHECK(expected_improvement(2.0, 0.0, 1.0, 0.0) == 1.0);
    CHECK(expected_improvement(0.5, 0.0, 1.0, 0.0) == 0.0);
  }

  TEST_CASE("minimization mirrors maximization") {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
      const double mu = uniform01(rng) * 4 - 2, s = uniform01(rng), f = uniform01(rng) * 4 - 2;
      CHECK(expected_improvement(mu, s, f, 0.01, Direction::minimize) ==
            doctest::Approx(expected_improvement(-mu, s, -f, 0.01, Direction::maximize)).epsilon(1e-14));
    }
  }

  TEST_CASE("property: EI is non-negative and grows with sigma") {
    Rng rng(2);
    for (int t = 0; t < 200; ++t) {
      const double mu = uniform01(rng) * 6 - 3, f = uniform01(rng) * 6 - 3;
      double prev = -1.0;
      for (double s : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0}) {
        const double ei = expected_improvement(mu, s, f, 0.0);
        CHECK(ei >= 0.0);
        CHECK(ei >= prev - 1e-15);
        prev = ei;
      }
    }
  }

  TEST_CASE("maximizer finds the peak of a smooth bump") {
    const std::vector<double> peak{0.31, 0.77, 0.52};
    auto bump = [&](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += (x[k] - peak[k]) * (x[k] - peak[k]);
      return std::exp(-s / 0.1);
    };
    const auto best = maximize_acquisition(bump, 3, {}, 7);
    for (std::size_t k = 0; k < 3; ++k) CHECK(best[k] == doctest::Approx(peak[k]).epsilon(0.01));
    CHECK(best == maximize_acquisition(bump, 3, {}, 7));
  }

  TEST_CASE("property: maximizer output stays in the unit cube") {
    auto edge = [](std::span<const double> x) { return x[0] - x[1]; };
    const auto best = maximize_acquisition(edge, 2, {}, 3);
    CHECK(best[0] <= 1.0);
    CHECK(best[0] > 0.95);
    CHECK(best[1] >= 0.0);
    CHECK(best[1] < 0.05);
  }
}
