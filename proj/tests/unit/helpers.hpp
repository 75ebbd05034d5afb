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

// Small builders shared by the unit suites.

#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flagtune/flagspace.hpp"
#include "flagtune/random.hpp"
#include "flagtune/virtual_target.hpp"

namespace flagtune::testing {

// d continuous flags F0..F{d-1} on [0, 1], default 0.5.
inline FlagSpace unit_space(std::size_t d, double fallback = 0.5) {
  std::vector<FlagSpec> flags;
  for (std::size_t i = 0; i < d; ++i) flags.push_back(FlagSpec::continuous("F" + std::to_string(i), 0.0, 1.0, fallback));
  return FlagSpace(std::move(flags));
}

inline VirtualTarget sparse_target(std::size_t d, std::vector<std::size_t> relevant, std::vector<double> centers,
                                   std::vector<double> weights, double noise_sd = 0.0, double base = 1.0) {
  VirtualTarget t;
  t.dimension = d;
  t.relevant = std::move(relevant);
  t.centers = std::move(centers);
  t.weights = std::move(weights);
  t.noise_sd = noise_sd;
  t.base = base;
  t.validate();
  return t;
}

inline std::vector<double> random_point(Rng& rng, std::size_t d) {
  std::vector<double> x(d);
  for (auto& v : x) v = uniform01(rng);
  return x;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("flagtune-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Small virtual-target project over d unit flags; F0 and F1 matter.
inline nlohmann::json virtual_project(std::size_t d, std::uint64_t seed = 7) {
  nlohmann::json doc;
  doc["seed"] = seed;
  doc["flag_space"] = flag_space_to_json(unit_space(d));
  doc["target"] = {{"type", "virtual"},
                   {"relevant", {"F0", "F1"}},
                   {"centers", {0.3, 0.7}},
                   {"weights", {2.0, 1.0}},
                   {"noise_sd", 0.01}};
  doc["metric"] = "time";
  doc["active_learning"] = {{"candidates", 100}, {"max_rounds", 3}, {"rel_rmse_eps", 0.0},
                            {"sgd", {{"learning_rate", 0.02}, {"epochs", 100}, {"batch_size", 1}}}};
  doc["lasso"] = {{"lambda", 0.01}};
  doc["tuner"] = {{"budget", 4}, {"init_size", 3}, {"gp_restarts", 1}, {"sa", {{"lhs_init", 3}}}};
  return doc;
}

}  // namespace flagtune::testing
