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

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flagtune/csv.hpp"
#include "flagtune/executor.hpp"
#include "flagtune/flagspace.hpp"

namespace fs = std::filesystem;
using flagtune::run_process;
using nlohmann::json;

namespace {

const fs::path kWork = FLAGTUNE_TEST_WORKDIR;

flagtune::ProcessResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), FLAGTUNE_CLI_PATH);
  return run_process(args, 120.0, kWork);
}

std::size_t lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

fs::path write_project(const std::string& name, json target, std::string metric = "time") {
  std::vector<flagtune::FlagSpec> flags;
  for (int i = 0; i < 3; ++i) flags.push_back(flagtune::FlagSpec::continuous("F" + std::to_string(i), 0.0, 1.0, 0.5));
  json doc;
  doc["seed"] = 5;
  doc["flag_space"] = flagtune::flag_space_to_json(flagtune::FlagSpace(flags));
  doc["target"] = std::move(target);
  doc["metric"] = std::move(metric);
  doc["active_learning"] = {{"candidates", 60}, {"max_rounds", 2}, {"rel_rmse_eps", 0.0},
                            {"sgd", {{"learning_rate", 0.02}, {"epochs", 50}, {"batch_size", 1}}}};
  doc["tuner"] = {{"budget", 3}, {"init_size", 3}, {"gp_restarts", 1}};
  doc["output_dir"] = name + "_out";
  const auto path = kWork / (name + ".json");
  fs::remove_all(kWork / (name + "_out"));
  flagtune::write_file_atomic(path, doc.dump(2));
  return path;
}

json virtual_target() {
  return {{"type", "virtual"}, {"relevant", {"F0"}}, {"centers", {0.25}}, {"weights", {3.0}}, {"noise_sd", 0.01}};
}

void check_error(const flagtune::ProcessResult& r, int code, const std::string& prefix) {
  CHECK(r.exit_code == code);
  CHECK(r.output.rfind(prefix, 0) == 0);
  CHECK(lines(r.output) == 1);
}

}  // namespace

TEST_CASE("usage errors exit 1 with one line") {
  fs::create_directories(kWork);
  check_error(cli({}), 1, "flagtune: error: usage: ");
  check_error(cli({"datagen", "--project", "/no/such/project.json"}), 1, "flagtune: error: usage: ");
  const auto p = write_project("usage", virtual_target());
  check_error(cli({"tune", "--project", p.string(), "--algorithm", "gradient"}), 1, "flagtune: error: usage: ");
  check_error(cli({"bogus"}), 1, "flagtune: error: usage: ");
}

TEST_CASE("invalid project exits 1") {
  fs::create_directories(kWork);
  flagtune::write_file_atomic(kWork / "broken.json", "{\"seed\": 1");
  check_error(cli({"datagen", "--project", (kWork / "broken.json").string()}), 1, "flagtune: error: parse-error: ");
}

TEST_CASE("missing target exits 2") {
  fs::create_directories(kWork);
  const auto p = write_project("missing", {{"type", "process"}, {"command", {"/no/such/java-xyz", "{flags}"}}});
  const auto r = cli({"datagen", "--project", p.string()});
  check_error(r, 2, "flagtune: error: target-failure: target not found: /no/such/java-xyz");
  CHECK_FALSE(fs::exists(kWork / "missing_out" / "dataset.csv"));
}

TEST_CASE("missing upstream artifacts exit 3") {
  fs::create_directories(kWork);
  const auto p = write_project("deps", virtual_target());
  check_error(cli({"select", "--project", p.string()}), 3, "flagtune: error: dependency-missing: ");
  check_error(cli({"tune", "--project", p.string()}), 3, "flagtune: error: dependency-missing: ");
  check_error(cli({"tune", "--project", p.string(), "--algorithm", "bo-warm", "--all-flags"}), 3,
              "flagtune: error: dependency-missing: ");
  check_error(cli({"report", "--project", p.string()}), 3, "flagtune: error: dependency-missing: ");
}

TEST_CASE("end-to-end run on a virtual target") {
  fs::create_directories(kWork);
  const auto p = write_project("e2e", virtual_target());
  auto r = cli({"datagen", "--project", p.string()});
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("dataset.csv") != std::string::npos);
  REQUIRE(cli({"select", "--project", p.string()}).exit_code == 0);
  CHECK(flagtune::read_file(kWork / "e2e_out" / "selected_flags.txt").find("F0") != std::string::npos);
  for (const char* alg : {"bo", "sa", "rbo", "bo-warm"}) {
    r = cli({"tune", "--project", p.string(), "--algorithm", alg});
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("speedup: ") != std::string::npos);
  }
  r = cli({"report", "--project", p.string()});
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("bo-warm") != std::string::npos);
  CHECK(fs::exists(kWork / "e2e_out" / "report.csv"));
}

TEST_CASE("seed and output overrides") {
  fs::create_directories(kWork);
  const auto p = write_project("seeds", virtual_target());
  const auto a = kWork / "seeds_a", b = kWork / "seeds_b", c = kWork / "seeds_c";
  for (const auto& d : {a, b, c}) fs::remove_all(d);
  REQUIRE(cli({"datagen", "--project", p.string(), "--out", a.string()}).exit_code == 0);
  REQUIRE(cli({"datagen", "--project", p.string(), "--out", b.string()}).exit_code == 0);
  REQUIRE(cli({"datagen", "--project", p.string(), "--out", c.string(), "--seed", "6"}).exit_code == 0);
  CHECK(flagtune::read_file(a / "dataset.csv") == flagtune::read_file(b / "dataset.csv"));
  CHECK(flagtune::read_file(a / "dataset.csv") != flagtune::read_file(c / "dataset.csv"));
}
