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

// flagtune datagen|select|tune|report --project FILE [options]
//
// Exit status: 0 ok, 1 usage or invalid input, 2 target failure,
// 3 missing artifact from an earlier phase. Errors print one line:
//   flagtune: error: <kind>: <message>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flagtune/csv.hpp"
#include "flagtune/error.hpp"
#include "flagtune/pipeline.hpp"
#include "flagtune/project.hpp"

namespace {

int exit_code(flagtune::ErrorKind kind) {
  switch (kind) {
    case flagtune::ErrorKind::target_failure:
      return 2;
    case flagtune::ErrorKind::dependency_missing:
      return 3;
    default:
      return 1;
  }
}

std::string one_line(std::string text) {
  for (auto& c : text)
    if (c == '\n' || c == '\r') c = ' ';
  return text;
}

void print_artifacts(std::initializer_list<std::filesystem::path> paths) {
  for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"JVM-style flag autotuner: characterize, select, tune, report"};
  app.require_subcommand(1);

  std::string project_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string algorithm;
  bool all_flags = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--project", project_path, "Project file (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Override the project seed");
    cmd->add_option("--out", out_dir, "Override the output directory");
  };
  auto* datagen = app.add_subcommand("datagen", "Characterize the target with active learning");
  auto* select = app.add_subcommand("select", "Select relevant flags with lasso");
  auto* tune = app.add_subcommand("tune", "Search for good flag values");
  auto* report = app.add_subcommand("report", "Compare tuning reports");
  for (auto* cmd : {datagen, select, tune, report}) add_common(cmd);
  tune->add_option("--algorithm", algorithm, "bo, bo-warm, rbo or sa (default: project setting)")
      ->check(CLI::IsMember({"bo", "bo-warm", "rbo", "sa"}));
  tune->add_flag("--all-flags", all_flags, "Skip selection and tune every active flag");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "flagtune: error: usage: " << one_line(e.what()) << '\n';
    return 1;
  }

  try {
    auto project = flagtune::load_project(project_path);
    if (seed) project.seed = *seed;
    if (!out_dir.empty()) project.output_dir = out_dir;

    if (datagen->parsed()) {
      const auto a = flagtune::cmd_datagen(project);
      print_artifacts({a.dataset, a.trials, a.al_report, a.model});
    } else if (select->parsed()) {
      const auto a = flagtune::cmd_select(project);
      print_artifacts({a.selected_flags, a.selection_report});
    } else if (tune->parsed()) {
      const auto a = flagtune::cmd_tune(project, algorithm.empty() ? project.tuner.algorithm : algorithm, all_flags);
      std::cout << flagtune::read_file(a.summary);
      print_artifacts({a.tuning_report, a.trajectory, a.summary});
    } else {
      const auto table = flagtune::cmd_report(project);
      std::cout << flagtune::comparison_text(table);
    }
  } catch (const flagtune::Error& e) {
    std::cerr << "flagtune: error: " << flagtune::to_string(e.kind()) << ": " << one_line(e.what()) << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "flagtune: error: internal: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}
