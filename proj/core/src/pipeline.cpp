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

#include "flagtune/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flagtune/csv.hpp"
#include "flagtune/error.hpp"
#include "flagtune/random.hpp"

namespace flagtune {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string num(double v, int digits = 12) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void need(const fs::path& path, const std::string& why) {
  if (!fs::exists(path)) fail(ErrorKind::dependency_missing, why + " (missing " + path.string() + ")");
}

std::vector<std::string> read_flag_list(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> names;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line.front() == '#') continue;
    names.push_back(line);
  }
  return names;
}

std::uint64_t phase_seed(const ProjectConfig& p, std::uint64_t phase) { return derive_seed(p.seed, phase); }

}  // namespace

RunArtifacts artifact_paths(const fs::path& dir, const std::string& algorithm) {
  RunArtifacts a;
  a.dataset = dir / "dataset.csv";
  a.trials = dir / "trials.jsonl";
  a.al_report = dir / "al_report.json";
  a.model = dir / "model.json";
  a.selected_flags = dir / "selected_flags.txt";
  a.selection_report = dir / "selection_report.json";
  if (!algorithm.empty()) {
    a.tuning_report = dir / ("tuning_" + algorithm + ".json");
    a.trajectory = dir / ("trajectory_" + algorithm + ".csv");
    a.summary = dir / ("summary_" + algorithm + ".txt");
  }
  a.report_text = dir / "report.txt";
  a.report_csv = dir / "report.csv";
  return a;
}

RunArtifacts cmd_datagen(const ProjectConfig& project) {
  if (project.process && !target_resolvable(*project.process))
    fail(ErrorKind::target_failure, "target not found: " + project.process->command.front());
  const auto a = artifact_paths(project.output_dir);
  fs::create_directories(project.output_dir);

  auto evaluator = make_evaluator(project);
  std::ostringstream log;
  RecordingEvaluator recording(*evaluator, log);
  AlResult result;
  try {
    result = run_al_loop(recording, project.active_learning, phase_seed(project, 1));
  } catch (...) {
    write_file_atomic(a.trials, log.str());
    throw;
  }
  write_file_atomic(a.trials, log.str());
  write_file_atomic(a.dataset, dataset_csv(project.space, result.trials));
  write_file_atomic(a.al_report, al_report_to_json(result.report).dump(2) + "\n");
  const json model = {{"space", project.space.fingerprint()},
                      {"metric", project.objective.metric},
                      {"test_rmse", rmse(result.model, result.test)},
                      {"model", model_to_json(result.model)}};
  write_file_atomic(a.model, model.dump(2) + "\n");
  return a;
}

RunArtifacts cmd_select(const ProjectConfig& project) {
  const auto a = artifact_paths(project.output_dir);
  need(a.dataset, "select needs the datagen dataset; run datagen first");
  const auto data = dataset_from_csv(read_csv_file(a.dataset), project.space, project.objective.metric);

  auto options = project.lasso.options;
  options.lambda = project.lasso.lambda
                       ? *project.lasso.lambda
                       : grid_search_lambda(data, project.lasso.grid, project.lasso.folds, phase_seed(project, 2), options);
  const auto fit = fit_lasso(data, options);
  const auto subset = select_flags(fit, project.space, project.lasso.threshold);

  std::string list;
  for (const auto& n : subset.names) list += n + "\n";
  write_file_atomic(a.selected_flags, list);
  write_file_atomic(a.selection_report, selection_report_to_json(fit, project.space, subset).dump(2) + "\n");
  return a;
}

RunArtifacts cmd_tune(const ProjectConfig& project, const std::string& algorithm, bool all_flags) {
  require(known_algorithm(algorithm), "unknown algorithm '" + algorithm + "'");
  const auto a = artifact_paths(project.output_dir, algorithm);

  std::vector<std::string> flags;
  if (!all_flags) {
    need(a.selected_flags, "tune needs the selected flags; run select first or pass --all-flags");
    flags = read_flag_list(a.selected_flags);
    for (const auto& n : flags)
      if (!project.space.dimension_of(n)) fail(ErrorKind::invalid_argument, "selected flag " + n + " is not in the flag space");
  }
  if (flags.empty()) flags = project.space.active_names();

  auto evaluator = make_evaluator(project);
  TuneTask task;
  task.evaluator = evaluator.get();
  task.flags = flags;
  task.objective = project.objective;
  task.budget = project.tuner.budget;
  task.init_size = project.tuner.init_size;
  task.seed = phase_seed(project, 3);
  task.gp.restarts = project.tuner.gp_restarts;
  task.xi = project.tuner.xi;
  task.failure_penalty = project.tuner.failure_penalty;

  TuningReport report;
  if (algorithm == "bo") {
    report = tune_bo(task);
  } else if (algorithm == "sa") {
    report = tune_sa(task, project.tuner.sa);
  } else if (algorithm == "bo-warm") {
    need(a.dataset, "bo-warm is unavailable without data from the datagen phase; run datagen first");
    const auto sub = project.space.restricted_to(flags);
    report = tune_bo_warm(task, dataset_from_csv(read_csv_file(a.dataset), sub, project.objective.metric));
  } else {
    need(a.model, "rbo is unavailable without the model from the datagen phase; run datagen first");
    const auto doc = json::parse(read_file(a.model));
    if (doc.at("space").get<std::string>() != project.space.fingerprint())
      fail(ErrorKind::dependency_missing, "model.json was trained on a different flag space; rerun datagen");
    if (doc.at("metric").get<std::string>() != project.objective.metric)
      fail(ErrorKind::dependency_missing, "model.json predicts a different metric; rerun datagen");
    report = tune_rbo(task, model_from_json(doc.at("model")), project.tuner.confirm_runs);
  }

  write_file_atomic(a.tuning_report, tuning_report_to_json(report).dump(2) + "\n");
  write_file_atomic(a.trajectory, trajectory_csv(report));
  write_file_atomic(a.summary, tuning_summary(report, project.space));
  return a;
}

std::string tuning_summary(const TuningReport& r, const FlagSpace& space) {
  Configuration tuned;
  for (const auto& n : r.tuned_flags)
    if (const auto* v = r.best_config.find(n)) tuned.set(n, *v);
  std::string args;
  for (const auto& arg : render_cli_args(space, tuned)) args += (args.empty() ? "" : " ") + arg;
  std::ostringstream out;
  out << "algorithm: " << r.algorithm << '\n'
      << "metric: " << r.objective.metric << " (" << to_string(r.objective.direction) << ")\n"
      << "default value: " << num(r.default_value) << '\n'
      << "best value: " << num(r.best_value) << '\n'
      << "speedup: " << num(r.speedup) << '\n'
      << "real executions: " << r.total_executions() << " (including 1 default run)\n"
      << "tuned flags: " << r.tuned_flags.size() << '\n'
      << "best flags: " << args << '\n';
  return out.str();
}

double improvement_percent(Direction direction, double default_value, double best_value) {
  const double gain = direction == Direction::minimize ? default_value - best_value : best_value - default_value;
  return gain / default_value * 100.0;
}

ComparisonTable comparison_table(const std::vector<TuningReport>& reports) {
  require(!reports.empty(), "report needs at least one tuning report");
  ComparisonTable table;
  table.metric = reports.front().objective.metric;
  table.direction = reports.front().objective.direction;
  for (const auto& r : reports) {
    if (r.objective.metric != table.metric || r.objective.direction != table.direction)
      fail(ErrorKind::invalid_argument, "cannot mix metrics in one table: " + table.metric + " and " + r.objective.metric);
    table.rows.push_back({r.algorithm, r.default_value, r.best_value, r.speedup,
                          improvement_percent(r.objective.direction, r.default_value, r.best_value), r.total_executions()});
  }
  auto rank = [](const std::string& alg) {
    const auto it = std::find(std::begin(kAlgorithms), std::end(kAlgorithms), alg);
    return it - std::begin(kAlgorithms);
  };
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [&](const ComparisonRow& x, const ComparisonRow& y) { return rank(x.algorithm) < rank(y.algorithm); });
  return table;
}

std::string comparison_text(const ComparisonTable& t) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %14s %14s %9s %12s %6s\n", "tuner", "default", "best", "speedup", "improvement",
                "runs");
  out << "metric: " << t.metric << " (" << to_string(t.direction) << ")\n" << line;
  for (const auto& r : t.rows) {
    std::snprintf(line, sizeof line, "%-8s %14.6g %14.6g %8.3fx %11.1f%% %6zu\n", r.algorithm.c_str(), r.default_value,
                  r.best_value, r.speedup, r.improvement_pct, r.executions);
    out << line;
  }
  return out.str();
}

std::string comparison_csv(const ComparisonTable& t) {
  std::string out = "algorithm,metric,direction,default_value,best_value,speedup,improvement_pct,executions\n";
  for (const auto& r : t.rows) {
    out += r.algorithm + "," + t.metric + "," + std::string(to_string(t.direction)) + "," + num(r.default_value, 17) + "," +
           num(r.best_value, 17) + "," + num(r.speedup, 17) + "," + num(r.improvement_pct, 17) + "," +
           std::to_string(r.executions) + "\n";
  }
  return out;
}

ComparisonTable cmd_report(const ProjectConfig& project) {
  std::vector<TuningReport> reports;
  for (const char* alg : kAlgorithms) {
    const auto path = artifact_paths(project.output_dir, alg).tuning_report;
    if (fs::exists(path)) reports.push_back(tuning_report_from_json(json::parse(read_file(path))));
  }
  if (reports.empty()) fail(ErrorKind::dependency_missing, "no tuning reports in " + project.output_dir.string() + "; run tune first");
  auto table = comparison_table(reports);
  const auto a = artifact_paths(project.output_dir);
  write_file_atomic(a.report_text, comparison_text(table));
  write_file_atomic(a.report_csv, comparison_csv(table));
  return table;
}

}  // namespace flagtune
