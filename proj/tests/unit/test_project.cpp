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

#include <nlohmann/json.hpp>

#include "flagtune/csv.hpp"
#include "flagtune/error.hpp"
#include "flagtune/project.hpp"
#include "unit/helpers.hpp"

using namespace flagtune;
using nlohmann::json;

namespace {

ErrorKind kind_of(const json& doc, const std::filesystem::path& base = ".") {
  try {
    project_from_json(doc, base);
  } catch (const Error& e) {
    return e.kind();
  } catch (const json::exception&) {
    return ErrorKind::parse;
  }
  FAIL("expected an error");
  return ErrorKind::invalid_argument;
}

}  // namespace

TEST_SUITE("project") {
  TEST_CASE("virtual project loads with defaults filled in") {
    const auto p = project_from_json(testing::virtual_project(5, 11), "/tmp/base");
    CHECK(p.seed == 11);
    CHECK(p.space.dimension() == 5);
    CHECK(p.virtual_target.has_value());
    CHECK_FALSE(p.process.has_value());
    CHECK(p.objective.metric == "time");
    CHECK(p.objective.direction == Direction::minimize);
    CHECK(p.active_learning.candidates == 100);
    CHECK(p.active_learning.sgd.batch_size == 1);
    CHECK(p.tuner.budget == 4);
    CHECK(p.tuner.algorithm == "bo");
    CHECK(*p.lasso.lambda == 0.01);
    CHECK(p.output_dir == std::filesystem::path("/tmp/base/out"));
    const auto ev = make_evaluator(p);
    CHECK(ev->space().dimension() == 5);
  }

  TEST_CASE("flag space from a dump file with include filter and overrides") {
    testing::TempDir dir("project");
    write_file_atomic(dir.path() / "flags.txt",
                      "[Global flags]\n"
                      "     bool UseG1GC                                  = false                                {product} {default}\n"
                      "     uintx MaxTenuringThreshold                    = 15                                   {product} {default}\n"
                      "     intx CICompilerCount                          = 2                                    {product} {ergonomic}\n");
    auto doc = testing::virtual_project(2);
    doc["flag_space"] = {{"dump", "flags.txt"},
                         {"include", {"Tenuring", "G1"}},
                         {"overrides", {{"MaxTenuringThreshold", {{"range", {1, 15}}}}}}};
    doc["target"]["relevant"] = {"MaxTenuringThreshold"};
    doc["target"]["centers"] = {0.5};
    doc["target"]["weights"] = {1.0};
    const auto p = project_from_json(doc, dir.path());
    CHECK(p.space.active_names() == std::vector<std::string>{"UseG1GC", "MaxTenuringThreshold"});
    CHECK(p.space.find("MaxTenuringThreshold")->int_lower == 1);
  }

  TEST_CASE("process target with a stdout probe") {
    auto doc = testing::virtual_project(3);
    doc["target"] = {{"type", "process"},
                     {"command", {"/bin/sh", "-c", "echo score: 1 {flags}"}},
                     {"probes", {"stdout:score"}},
                     {"timeout_s", 5}};
    doc["metric"] = "score";
    doc["direction"] = "maximize";
    const auto p = project_from_json(doc, ".");
    REQUIRE(p.process.has_value());
    CHECK(p.process->timeout_s == 5.0);
    CHECK(p.objective.direction == Direction::maximize);
    CHECK(p.active_learning.metric == "score");
  }

  TEST_CASE("invalid projects are rejected") {
    auto no_seed = testing::virtual_project(3);
    no_seed.erase("seed");
    CHECK(kind_of(no_seed) == ErrorKind::invalid_argument);

    auto bad_alg = testing::virtual_project(3);
    bad_alg["tuner"]["algorithm"] = "gradient";
    CHECK(kind_of(bad_alg) == ErrorKind::invalid_argument);

    auto unprobed = testing::virtual_project(3);
    unprobed["target"] = {{"type", "process"}, {"command", {"/bin/true"}}};
    unprobed["metric"] = "score";
    CHECK(kind_of(unprobed) == ErrorKind::invalid_argument);

    auto unknown_flag = testing::virtual_project(3);
    unknown_flag["target"]["relevant"] = {"F0", "F9"};
    CHECK(kind_of(unknown_flag) == ErrorKind::invalid_argument);

    auto missing_dump = testing::virtual_project(3);
    missing_dump["flag_space"] = {{"dump", "/nonexistent/flags.txt"}};
    CHECK(kind_of(missing_dump) == ErrorKind::io);

    auto bad_scaling = testing::virtual_project(3);
    bad_scaling["lasso"]["scaling"] = "quadratic";
    CHECK(kind_of(bad_scaling) == ErrorKind::invalid_argument);
  }

  TEST_CASE("lasso grid without lambda switches to cross-validation") {
    auto doc = testing::virtual_project(3);
    doc["lasso"] = {{"grid", {0.1, 0.01}}, {"folds", 3}};
    const auto p = project_from_json(doc, ".");
    CHECK_FALSE(p.lasso.lambda.has_value());
    CHECK(p.lasso.grid.size() == 2);
    CHECK(p.lasso.folds == 3);
  }

  TEST_CASE("load_project resolves relative paths against the file location") {
    testing::TempDir dir("project");
    write_file_atomic(dir.path() / "sub" / "project.json", testing::virtual_project(3).dump());
    const auto p = load_project(dir.path() / "sub" / "project.json");
    CHECK(p.output_dir == dir.path() / "sub" / "out");
    write_file_atomic(dir.path() / "broken.json", "{ not json");
    try {
      load_project(dir.path() / "broken.json");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
    }
  }

  TEST_CASE("algorithm names") {
    for (const char* a : kAlgorithms) CHECK(known_algorithm(a));
    CHECK_FALSE(known_algorithm("BO"));
  }
}
