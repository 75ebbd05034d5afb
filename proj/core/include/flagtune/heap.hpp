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

// Heap-usage metric derived from `jstat -gc` samples.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace flagtune {

// Capacities (C) and utilizations (U) in KB.
struct HeapSample {
  double s0c = 0, s1c = 0, ec = 0, oc = 0;
  double s0u = 0, s1u = 0, eu = 0, ou = 0;
};

// Utilized share of committed survivor, eden and old space, in percent.
double heap_usage_sample(const HeapSample& sample);

// Mean of per-sample heap usage over one run.
double aggregate_heap(std::span<const double> usage_percentages);

struct JstatParse {
  std::vector<HeapSample> samples;
  std::size_t skipped_rows = 0;
};

// Header columns are matched by name and may appear in any order; repeated
// header lines are ignored.
JstatParse parse_jstat_stream(std::string_view text);

}  // namespace flagtune
