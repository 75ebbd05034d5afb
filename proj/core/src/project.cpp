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

#include "flagtune/project.hpp"

#include <algorithm>
#include <regex>

#include <nlohmann/json.hpp>

#include "flagtune/csv.hpp"
#include "flagtune/error.hpp"

namespace flagtune {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

fs::path existing(const fs::path& base, const std::string& p) {
  auto path = resolve(base, p);
  if (!fs::exists(path)) fail(ErrorKind::io, "referenced file does not exist: " + path.string());
  return path;
}

template <typename T>
void read(const json& doc, const char* key, T& out) {
  if (doc.contains(key) && !doc.at(key).is_null()) out = doc.at(key).get<T>();
}

FlagSpace load_space(const json& doc, const fs::path& base) {
  require(doc.is_object(), "'flag_space' must be an object");
  std::vector<FlagSpec> flags;
  if (doc.contains("dump")) {
    GroupRules rules;
    for (const auto& r : doc.value("group_rules", json::array()))
      rules.emplace_back(r.at("pattern").get<std::string>(), r.at("group").get<std::string>());
    flags = parse_flag_dump(read_file(existing(base, doc.at("dump").get<std::string>())), rules).space.flags();
  } else if (doc.contains("file")) {
    flags = flag_space_from_json(json::parse(read_file(existing(base, doc.at("file").get<std::string>())))).flags();
  } else if (doc.contains("flags")) {
    flags = flag_space_from_json(doc).flags();
  } else {
    fail(ErrorKind::invalid_argument, "'flag_space' needs one of 'dump', 'file' or 'flags'");
  }

  if (doc.contains("include")) {
    std::vector<std::regex> patterns;
    for (const auto& p : doc.at("include")) patterns.emplace_back(p.get<std::string>());
    std::erase_if(flags, [&](const FlagSpec& f) {
      return std::none_of(patterns.begin(), patterns.end(), [&](const std::regex& re) { return std::regex_search(f.name, re); });
    });
  }

  const json overrides = doc.value("overrides", json::object());
  for (const auto& [name, patch] : overrides.items()) {
    auto it = std::find_if(flags.begin(), flags.end(), [&](const FlagSpec& f) { return f.name == name; });
    if (it == flags.end()) fail(ErrorKind::invalid_argument, "override for unknown flag " + name);
    json merged = *it;
    merged.merge_patch(patch);
    merged["name"] = name;
    *it = merged.get<FlagSpec>();
    it->validate();
  }
  require(!flags.empty(), "flag space is empty");
  return FlagSpace(std::move(flags));
}

TargetSpec load_process(const json& doc, const fs::path& base) {
  TargetSpec t;
  t.command = doc.at("command").get<std::vector<std::string>>();
  if (doc.contains("working_dir")) t.working_dir = resolve(base, doc.at("working_dir").get<std::string>());
  read(doc, "timeout_s", t.timeout_s);
  read(doc, "repeat", t.repeat);
  read(doc, "probes", t.probes);
  read(doc, "env", t.env);
  if (doc.contains("heap")) {
    read(doc.at("heap"), "command", t.heap.command);
    read(doc.at("heap"), "cadence_s", t.heap.cadence_s);
  }
  t.validate();
  return t;
}

void load_al(const json& doc, AlSettings& al) {
  read(doc, "candidates", al.candidates);
  read(doc, "seed_fraction", al.seed_fraction);
  read(doc, "test_fraction", al.test_fraction);
  read(doc, "degree", al.degree);
  read(doc, "interactions", al.interactions);
  read(doc, "batch_fraction", al.budget.batch_fraction);
  read(doc, "max_rounds", al.budget.max_rounds);
  read(doc, "rel_rmse_eps", al.budget.rel_rmse_eps);
  read(doc, "ensemble_size", al.budget.ensemble_size);
  if (doc.contains("max_wall_clock_s")) al.budget.max_wall_clock_s = doc.at("max_wall_clock_s").get<double>();
  if (doc.contains("strategy")) al.strategy = batch_strategy_from_string(doc.at("strategy").get<std::string>());
  if (doc.contains("sgd")) {
    const auto& s = doc.at("sgd");
    read(s, "learning_rate", al.sgd.learning_rate);
    read(s, "epochs", al.sgd.epochs);
    read(s, "batch_size", al.sgd.batch_size);
  }
}

void load_lasso(const json& doc, LassoSettings& lasso) {
  if (doc.contains("lambda")) lasso.lambda = doc.at("lambda").get<double>();
  read(doc, "grid", lasso.grid);
  read(doc, "folds", lasso.folds);
  read(doc, "threshold", lasso.threshold);
  read(doc, "tolerance", lasso.options.tolerance);
  read(doc, "max_sweeps", lasso.options.max_sweeps);
  if (doc.contains("scaling")) {
    const auto s = doc.at("scaling").get<std::string>();
    if (s == "per_sample") lasso.options.scaling = LassoScaling::per_sample;
    else if (s == "unscaled") lasso.options.scaling = LassoScaling::unscaled;
    else fail(ErrorKind::invalid_argument, "unknown lasso scaling '" + s + "'");
  }
}

void load_tuner(const json& doc, TunerSettings& t) {
  read(doc, "algorithm", t.algorithm);
  read(doc, "budget", t.budget);
  read(doc, "init_size", t.init_size);
  read(doc, "xi", t.xi);
  read(doc, "failure_penalty", t.failure_penalty);
  read(doc, "gp_restarts", t.gp_restarts);
  read(doc, "confirm_runs", t.confirm_runs);
  if (doc.contains("sa")) {
    const auto& s = doc.at("sa");
    read(s, "lhs_init", t.sa.lhs_init);
    if (s.contains("t0")) t.sa.t0 = s.at("t0").get<double>();
    read(s, "alpha", t.sa.alpha);
    read(s, "step_sd", t.sa.step_sd);
  }
}

bool metric_probed(const TargetSpec& t, const std::string& metric) {
  for (const auto& p : t.probes) {
    if (p == metric) return true;
    if (p.starts_with("stdout:") && p.substr(7) == metric) return true;
  }
  return false;
}

}  // namespace

bool known_algorithm(std::string_view name) noexcept {
  return std::find(std::begin(kAlgorithms), std::end(kAlgorithms), name) != std::end(kAlgorithms);
}

void ProjectConfig::validate() const {
  require(space.dimension() > 0, "flag space has no active flags");
  require(process.has_value() != virtual_target.has_value(), "exactly one target (process or virtual) is required");
  if (process) {
    require(metric_probed(*process, objective.metric),
            "metric '" + objective.metric + "' is not produced by any probe of the target");
  }
  if (virtual_target) (void)make_virtual_target(*virtual_target, space);
  require(active_learning.metric == objective.metric, "active-learning metric must match the project metric");
  active_learning.validate();
  require(known_algorithm(tuner.algorithm), "unknown algorithm '" + tuner.algorithm + "'");
  require(lasso.lambda.has_value() || !lasso.grid.empty(), "lasso needs 'lambda' or a non-empty 'grid'");
  require(!lasso.lambda || *lasso.lambda >= 0.0, "lasso lambda must be non-negative");
}

ProjectConfig project_from_json(const json& doc, const fs::path& base_dir) {
  require(doc.is_object(), "project file must be a JSON object");
  if (!doc.contains("seed") || !doc.at("seed").is_number_integer())
    fail(ErrorKind::invalid_argument, "project file needs an integer 'seed'");
  ProjectConfig p;
  p.base_dir = base_dir;
  p.seed = doc.at("seed").get<std::uint64_t>();
  p.space = load_space(doc.at("flag_space"), base_dir);
  if (doc.contains("active_groups")) p.space = p.space.with_active_groups(doc.at("active_groups").get<std::set<std::string>>());

  const auto& target = doc.at("target");
  const auto type = target.value("type", std::string("process"));
  if (type == "process") {
    p.process = load_process(target, base_dir);
  } else if (type == "virtual") {
    VirtualTargetSettings v;
    v.relevant = target.at("relevant").get<std::vector<std::string>>();
    v.centers = target.at("centers").get<std::vector<double>>();
    v.weights = target.at("weights").get<std::vector<double>>();
    read(target, "noise_sd", v.noise_sd);
    read(target, "base", v.base);
    p.virtual_target = std::move(v);
  } else {
    fail(ErrorKind::invalid_argument, "unknown target type '" + type + "'");
  }

  read(doc, "metric", p.objective.metric);
  if (doc.contains("direction")) p.objective.direction = direction_from_string(doc.at("direction").get<std::string>());
  p.active_learning.metric = p.objective.metric;
  if (doc.contains("active_learning")) load_al(doc.at("active_learning"), p.active_learning);
  p.lasso.lambda = 0.01;
  if (doc.contains("lasso")) {
    const auto& l = doc.at("lasso");
    if (l.contains("grid") && !l.contains("lambda")) p.lasso.lambda.reset();
    load_lasso(l, p.lasso);
  }
  if (doc.contains("tuner")) load_tuner(doc.at("tuner"), p.tuner);
  p.output_dir = resolve(base_dir, doc.value("output_dir", std::string("out")));
  p.validate();
  return p;
}

ProjectConfig load_project(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, path.string() + ": " + e.what());
  }
  try {
    return project_from_json(doc, path.has_parent_path() ? path.parent_path() : fs::path("."));
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_argument, path.string() + ": " + e.what());
  }
}

VirtualTarget make_virtual_target(const VirtualTargetSettings& s, const FlagSpace& space) {
  VirtualTarget t;
  t.dimension = space.dimension();
  for (const auto& name : s.relevant) {
    const auto d = space.dimension_of(name);
    if (!d) fail(ErrorKind::invalid_argument, "virtual target names inactive or unknown flag " + name);
    t.relevant.push_back(*d);
  }
  t.centers = s.centers;
  t.weights = s.weights;
  t.noise_sd = s.noise_sd;
  t.base = s.base;
  t.validate();
  return t;
}

std::unique_ptr<Evaluator> make_evaluator(const ProjectConfig& project) {
  if (project.virtual_target)
    return std::make_unique<VirtualExecutor>(make_virtual_target(*project.virtual_target, project.space), project.space,
                                             project.objective.metric);
  return std::make_unique<ProcessExecutor>(*project.process, project.space);
}

}  // namespace flagtune
