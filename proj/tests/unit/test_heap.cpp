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

#include <algorithm>
#include <vector>

#include "flagtune/error.hpp"
#include "flagtune/heap.hpp"
#include "flagtune/random.hpp"

using namespace flagtune;

namespace {

// `jstat -gc <pid> 5000 3` layout from a JDK 8 JVM.
const char* kJstat =
    " S0C    S1C    S0U    S1U      EC       EU        OC         OU       MC     MU    CCSC   CCSU   YGC     YGCT    FGC    FGCT     GCT   \n"
    "10752.0 10752.0  0.0   10736.4 65536.0  23152.5   175104.0     8.0     4864.0 2580.3 512.0  280.4       1    0.010   0      0.000    0.010\n"
    "10752.0 10752.0 10720.1  0.0   65536.0   4511.2   175104.0    3248.9   4864.0 2580.3 512.0  280.4       2    0.021   0      0.000    0.021\n"
    "10752.0 10752.0 10720.1  0.0   65536.0  61440.7   175104.0    3248.9   4864.0 2580.3 512.0  280.4       2    0.021   0      0.000    0.021\n";

}  // namespace

TEST_SUITE("heap") {
  TEST_CASE("heap usage examples") {
    HeapSample zero{20, 20, 100, 200, 0, 0, 0, 0};
    CHECK(heap_usage_sample(zero) == 0.0);
    HeapSample full{20, 20, 100, 200, 20, 20, 100, 200};
    CHECK(heap_usage_sample(full) == 100.0);
    HeapSample mixed{20, 20, 100, 200, 10, 0, 30, 60};
    CHECK(heap_usage_sample(mixed) == doctest::Approx(29.4118).epsilon(1e-5));
    CHECK_THROWS_AS(heap_usage_sample(HeapSample{}), Error);
  }

  TEST_CASE("aggregate examples") {
    const std::vector<double> one{50.0}, two{0.0, 100.0}, three{29.4118, 29.4118, 41.1765};
    CHECK(aggregate_heap(one) == 50.0);
    CHECK(aggregate_heap(two) == 50.0);
    CHECK(aggregate_heap(three) == doctest::Approx(33.3334).epsilon(1e-4 / 33.3334));
    CHECK_THROWS_AS(aggregate_heap(std::vector<double>{}), Error);
  }

  TEST_CASE("property: usage stays in [0, 100] and the mean within the sample range") {
    Rng rng(3);
    for (int t = 0; t < 300; ++t) {
      HeapSample s;
      s.s0c = 1 + 100 * uniform01(rng);
      s.s1c = 100 * uniform01(rng);
      s.ec = 100 * uniform01(rng);
      s.oc = 100 * uniform01(rng);
      s.s0u = s.s0c * uniform01(rng);
      s.s1u = s.s1c * uniform01(rng);
      s.eu = s.ec * uniform01(rng);
      s.ou = s.oc * uniform01(rng);
      const double hu = heap_usage_sample(s);
      CHECK(hu >= 0.0);
      CHECK(hu <= 100.0);
    }
    for (int t = 0; t < 100; ++t) {
      std::vector<double> xs(1 + rng() % 9);
      for (auto& x : xs) x = 100 * uniform01(rng);
      const double m = aggregate_heap(xs);
      CHECK(m >= *std::min_element(xs.begin(), xs.end()) - 1e-12);
      CHECK(m <= *std::max_element(xs.begin(), xs.end()) + 1e-12);
    }
  }

  TEST_CASE("jstat capture parses to the hand-read rows") {
    const auto parsed = parse_jstat_stream(kJstat);
    REQUIRE(parsed.samples.size() == 3);
    CHECK(parsed.skipped_rows == 0);
    CHECK(parsed.samples[0].s1u == 10736.4);
    CHECK(parsed.samples[0].eu == 23152.5);
    CHECK(parsed.samples[1].s0u == 10720.1);
    CHECK(parsed.samples[2].ou == 3248.9);
    const double expected[] = {12.930641174316406, 7.0496368408203125, 28.766517639160156};
    std::vector<double> hu;
    for (std::size_t i = 0; i < 3; ++i) {
      hu.push_back(heap_usage_sample(parsed.samples[i]));
      CHECK(hu.back() == doctest::Approx(expected[i]).epsilon(1e-12));
    }
    CHECK(aggregate_heap(hu) == doctest::Approx(16.248931884765625).epsilon(1e-12));
  }

  TEST_CASE("columns match by name in any order, with zero utilization") {
    const auto parsed = parse_jstat_stream("OU EU EC OC S1U S0U S1C S0C Extra\n0 0 100 200 0 0 20 20 7\n");
    REQUIRE(parsed.samples.size() == 1);
    CHECK(heap_usage_sample(parsed.samples[0]) == 0.0);
    CHECK(parsed.samples[0].oc == 200.0);
  }

  TEST_CASE("missing column is named and bad rows are counted") {
    try {
      parse_jstat_stream("S0C S1C S0U S1U EC EU OC\n1 1 0 0 1 0 1\n");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()) == "missing column OU");
    }
    const auto parsed = parse_jstat_stream("S0C S1C S0U S1U EC EU OC OU\n1 1 0 0 1 0 1 0\nx y z\n1 1 0 0 1 0 1 1\n");
    CHECK(parsed.samples.size() == 2);
    CHECK(parsed.skipped_rows == 1);
  }
}
