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

#include "flagtune/tuners.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flagtune/error.hpp"
#include "flagtune/random.hpp"
#include "flagtune/sampling.hpp"

namespace flagtune {
namespace {

enum Stream : std::uint64_t { kTrials = 11, kGp = 12, kAcquisition = 13, kLhs = 14, kAnneal = 15 };

// Bookkeeping shared by all drivers. Internally everything is a loss to
// minimize: the metric itself, or its negation when maximizing.
class Session {
 public:
  Session(const TuneTask& task, std::string algorithm, bool needs_init)
      : task_(task), full_(task.evaluator ? task.evaluator->space() : empty_) {
    task.validate(needs_init);
    sub_ = task.flags.empty() ? full_.restricted_to(full_.active_names()) : full_.restricted_to(task.flags);
    require(sub_.dimension() > 0, "nothing to tune: no flags selected");
    report_.algorithm = std::move(algorithm);
    report_.objective = task.objective;
    report_.tuned_flags = sub_.active_names();
  }

  const FlagSpace& sub() const { return sub_; }
  const FlagSpace& full() const { return full_; }
  TuningReport& report() { return report_; }
  double sign() const { return task_.objective.direction == Direction::minimize ? 1.0 : -1.0; }
  std::uint64_t stream(std::uint64_t s, std::uint64_t i) const { return derive_seed(derive_seed(task_.seed, s), i); }

  Configuration complete(std::span<const double> x) const {
    Configuration config = full_.defaults();
    for (const auto& [name, value] : decode(sub_, x)) config.set(name, value);
    return config;
  }
  std::vector<double> default_point() const { return encode(sub_, sub_.defaults()); }

  // One real execution; nullopt when the trial failed or lacked the metric.
  std::optional<double> execute(const Configuration& config) {
    auto record = task_.evaluator->run(config, stream(kTrials, trial_++));
    const auto it = record.metrics.find(task_.objective.metric);
    if (!record.ok() || it == record.metrics.end() || !std::isfinite(it->second)) return std::nullopt;
    return it->second;
  }

  void run_default() {
    const auto config = full_.defaults();
    const auto value = execute(config);
    if (!value) fail(ErrorKind::target_failure, "the default configuration failed to run");
    report_.default_value = *value;
    observe_loss(sign() * *value);
    best_loss_ = sign() * *value;
    report_.best_config = config;
    report_.best_value = *value;
    push({0, "default", config, *value, *value, false, std::nullopt});
  }

  // Real evaluation of an encoded point; returns the loss to feed a model
  // (penalized when the trial failed).
  double evaluate(std::span<const double> x, const std::string& phase, int iteration) {
    const auto config = complete(x);
    const auto value = execute(config);
    ++report_.real_executions;
    if (!value) {
      ++report_.failed_executions;
      const double loss = penalty();
      push({iteration, phase, config, sign() * loss, current_incumbent(), true, std::nullopt});
      return loss;
    }
    const double loss = sign() * *value;
    observe_loss(loss);
    ++ok_;
    if (loss < best_loss_) {
      best_loss_ = loss;
      report_.best_config = config;
      report_.best_value = *value;
    }
    push({iteration, phase, config, *value, current_incumbent(), false, std::nullopt});
    return loss;
  }

  std::size_t ok_evaluations() const { return ok_; }

  double penalty() const {
    const double worst = worst_loss_;
    return worst + (task_.failure_penalty - 1.0) * std::abs(worst);
  }

  void observe_loss(double loss) { worst_loss_ = std::max(worst_loss_, loss); }

  double current_incumbent() const { return sign() * best_loss_; }

  void push(TrajectoryEntry entry) { report_.trajectory.push_back(std::move(entry)); }

  TuningReport finish() {
    report_.speedup = speedup(task_.objective.direction, report_.default_value, report_.best_value);
    return std::move(report_);
  }

  double best_loss() const { return best_loss_; }
  void set_best(double loss, Configuration config, double value) {
    best_loss_ = loss;
    report_.best_config = std::move(config);
    report_.best_value = value;
  }

 private:
  static inline const FlagSpace empty_{};
  const TuneTask& task_;
  const FlagSpace& full_;
  FlagSpace sub_;
  TuningReport report_;
  double best_loss_ = std::numeric_limits<double>::infinity();
  double worst_loss_ = -std::numeric_limits<double>::infinity();
  std::uint64_t trial_ = 0;
  std::size_t ok_ = 0;
};

using LossFn = std::function<double(std::span<const double>, int iteration)>;

// GP fit -> EI maximization -> evaluation, `budget` times. `data` holds
// losses and grows in place.
void bayes_loop(Session& session, const TuneTask& task, Dataset& data, const LossFn& evaluate) {
  const std::size_t d = session.sub().dimension();
  std::optional<GpHyperparameters> previous;
  for (int it = 1; it <= task.budget; ++it) {
    GpOptions options = task.gp;
    options.warm_start = previous;
    const auto gp = gp_fit(data, options, session.stream(kGp, static_cast<std::uint64_t>(it)));
    previous = gp.hyperparameters();
    session.report().hyperparameter_log.push_back(gp.hyperparameters());
    const double f_best = *std::min_element(data.y.begin(), data.y.end());
    const double margin = task.xi * gp.target_sd();
    auto ei = [&](std::span<const double> x) {
      const auto p = gp.posterior(x);
      return expected_improvement(p.mean, p.sd, f_best, margin, Direction::minimize);
    };
    const auto x = maximize_acquisition(ei, d, task.acquisition, session.stream(kAcquisition, static_cast<std::uint64_t>(it)));
    data.add(x, evaluate(x, it));
  }
}

}  // namespace

void TuneTask::validate(bool needs_init) const {
  require(evaluator != nullptr, "tuning task has no evaluator");
  require(budget >= 1, "tuning budget must be at least 1");
  if (needs_init) require(init_size >= 2, "initial design needs at least 2 points");
  require(xi >= 0.0 && std::isfinite(xi), "xi must be finite and non-negative");
  require(failure_penalty >= 1.0, "failure penalty must be >= 1");
}

double speedup(Direction direction, double default_value, double best_value) {
  return direction == Direction::minimize ? default_value / best_value : best_value / default_value;
}

double sa_acceptance_probability(double delta, double temperature) {
  if (delta <= 0.0) return 1.0;
  if (!(temperature > 0.0)) return 0.0;
  return std::exp(-delta / temperature);
}

TuningReport tune_bo(const TuneTask& task) {
  Session session(task, "bo", true);
  session.run_default();
  Dataset data;
  for (const auto& x : sobol(task.init_size, session.sub().dimension())) data.add(x, session.evaluate(x, "init", 0));
  if (session.ok_evaluations() == 0) fail(ErrorKind::target_failure, "all initial trials failed");
  bayes_loop(session, task, data, [&](std::span<const double> x, int it) { return session.evaluate(x, "search", it); });
  return session.finish();
}

TuningReport tune_bo_warm(const TuneTask& task, const Dataset& prior) {
  Session session(task, "bo-warm", false);
  require(prior.size() >= 2, "warm start needs at least 2 prior observations");
  const std::size_t d = session.sub().dimension();
  Dataset data;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    require(prior.x[i].size() == d, "warm-start row " + std::to_string(i) + " has " +
                                        std::to_string(prior.x[i].size()) + " dimensions, expected " +
                                        std::to_string(d));
    data.add(prior.x[i], session.sign() * prior.y[i]);
  }
  session.run_default();
  for (double loss : data.y) session.observe_loss(loss);
  session.report().initial_incumbent = session.sign() * *std::min_element(data.y.begin(), data.y.end());
  bayes_loop(session, task, data, [&](std::span<const double> x, int it) { return session.evaluate(x, "search", it); });
  return session.finish();
}

TuningReport tune_rbo(const TuneTask& task, const LinearModel& model, int confirm_runs) {
  Session session(task, "rbo", true);
  require(confirm_runs >= 0, "confirm_runs must be non-negative");
  require(model.feature_map().input_dim == session.full().dimension(),
          "model expects " + std::to_string(model.feature_map().input_dim) + " flags, space has " +
              std::to_string(session.full().dimension()));
  session.run_default();
  auto& report = session.report();

  // The loop runs entirely on predictions; its trajectory is in predicted units.
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  auto predict = [&](std::span<const double> x, const std::string& phase, int it) {
    const auto config = session.complete(x);
    const double predicted = model.predict(encode(session.full(), config));
    ++report.model_evaluations;
    const double loss = session.sign() * predicted;
    if (loss < best_loss) {
      best_loss = loss;
      best_x.assign(x.begin(), x.end());
    }
    session.push({it, phase, config, predicted, session.sign() * best_loss, false, predicted});
    return loss;
  };
  // The default entry is restated as a prediction so the incumbent stays in one unit.
  {
    auto& first = report.trajectory.front();
    const double predicted = model.predict(encode(session.full(), first.config));
    ++report.model_evaluations;
    best_loss = session.sign() * predicted;
    best_x = session.default_point();
    first.predicted = predicted;
    first.value = predicted;
    first.incumbent = predicted;
  }
  Dataset data;
  for (const auto& x : sobol(task.init_size, session.sub().dimension())) data.add(x, predict(x, "init", 0));
  bayes_loop(session, task, data, [&](std::span<const double> x, int it) { return predict(x, "search", it); });

  const auto chosen = session.complete(best_x);
  report.predicted_value = session.sign() * best_loss;
  if (confirm_runs == 0) {
    if (best_loss < session.best_loss()) session.set_best(best_loss, chosen, session.sign() * best_loss);
    return session.finish();
  }
  double sum = 0.0;
  int ok = 0;
  for (int r = 0; r < confirm_runs; ++r) {
    const auto value = session.execute(chosen);
    ++report.real_executions;
    if (value) {
      sum += *value;
      ++ok;
    } else {
      ++report.failed_executions;
    }
  }
  if (ok > 0) {
    const double confirmed = sum / ok;
    report.confirmed_value = confirmed;
    if (session.sign() * confirmed < session.best_loss()) session.set_best(session.sign() * confirmed, chosen, confirmed);
    session.push({task.budget + 1, "confirm", chosen, confirmed, session.sign() * best_loss, false, report.predicted_value});
  } else {
    session.push({task.budget + 1, "confirm", chosen, 0.0, session.sign() * best_loss, true, report.predicted_value});
  }
  return session.finish();
}

TuningReport tune_sa(const TuneTask& task, const SaOptions& options) {
  require(options.lhs_init >= 1, "SA needs at least one LHS point");
  require(options.alpha > 0.0 && options.alpha <= 1.0, "SA cooling factor must lie in (0, 1]");
  require(options.step_sd > 0.0, "SA step size must be positive");
  Session session(task, "sa", false);
  session.run_default();
  const std::size_t d = session.sub().dimension();

  std::vector<double> current;
  double current_loss = std::numeric_limits<double>::infinity();
  std::vector<double> init_losses;
  for (const auto& x : lhs(options.lhs_init, d, session.stream(kLhs, 0))) {
    const double loss = session.evaluate(x, "init", 0);
    init_losses.push_back(loss);
    if (loss < current_loss) {
      current_loss = loss;
      current = x;
    }
  }
  if (session.ok_evaluations() == 0) fail(ErrorKind::target_failure, "all initial trials failed");

  double temperature = 0.0;
  if (options.t0) {
    temperature = *options.t0;
  } else if (init_losses.size() >= 2) {
    const double mean = std::accumulate(init_losses.begin(), init_losses.end(), 0.0) / static_cast<double>(init_losses.size());
    double var = 0.0;
    for (double l : init_losses) var += (l - mean) * (l - mean);
    temperature = std::sqrt(var / static_cast<double>(init_losses.size() - 1));
  }

  Rng rng(session.stream(kAnneal, 0));
  std::normal_distribution<double> step(0.0, options.step_sd);
  for (int it = 1; it <= task.budget; ++it) {
    auto candidate = current;
    const auto j = static_cast<std::size_t>(rng() % d);
    candidate[j] = std::clamp(candidate[j] + step(rng), 0.0, 1.0);
    const double loss = session.evaluate(candidate, "search", it);
    const double delta = loss - current_loss;
    const double u = uniform01(rng);
    if (u < sa_acceptance_probability(delta, temperature)) {
      current = std::move(candidate);
      current_loss = loss;
    }
    temperature *= options.alpha;
  }
  return session.finish();
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json config_json(const Configuration& config) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, value] : config) out[name] = std::visit([](const auto& v) { return nlohmann::json(v); }, value);
  return out;
}

Configuration config_from(const nlohmann::json& doc) {
  Configuration config;
  for (const auto& [name, value] : doc.items()) {
    if (value.is_boolean()) config.set(name, value.get<bool>());
    else if (value.is_number_integer()) config.set(name, value.get<std::int64_t>());
    else if (value.is_number()) config.set(name, value.get<double>());
    else config.set(name, value.get<std::string>());
  }
  return config;
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json tuning_report_to_json(const TuningReport& r) {
  nlohmann::json doc;
  doc["algorithm"] = r.algorithm;
  doc["metric"] = r.objective.metric;
  doc["direction"] = to_string(r.objective.direction);
  doc["tuned_flags"] = r.tuned_flags;
  doc["best_config"] = config_json(r.best_config);
  doc["best_value"] = r.best_value;
  doc["default_value"] = r.default_value;
  doc["speedup"] = r.speedup;
  doc["real_executions"] = r.real_executions;
  doc["default_runs"] = r.default_runs;
  doc["failed_executions"] = r.failed_executions;
  doc["model_evaluations"] = r.model_evaluations;
  doc["initial_incumbent"] = optional_json(r.initial_incumbent);
  doc["predicted_value"] = optional_json(r.predicted_value);
  doc["confirmed_value"] = optional_json(r.confirmed_value);
  doc["hyperparameters"] = nlohmann::json::array();
  for (const auto& h : r.hyperparameter_log)
    doc["hyperparameters"].push_back({{"length_scale", h.length_scale}, {"signal_var", h.signal_var}, {"noise_var", h.noise_var}});
  doc["trajectory"] = nlohmann::json::array();
  for (const auto& t : r.trajectory) {
    doc["trajectory"].push_back({{"iteration", t.iteration},
                                 {"phase", t.phase},
                                 {"config", config_json(t.config)},
                                 {"value", t.value},
                                 {"incumbent", t.incumbent},
                                 {"failed", t.failed},
                                 {"predicted", optional_json(t.predicted)}});
  }
  return doc;
}

TuningReport tuning_report_from_json(const nlohmann::json& doc) {
  TuningReport r;
  r.algorithm = doc.at("algorithm").get<std::string>();
  r.objective.metric = doc.at("metric").get<std::string>();
  r.objective.direction = direction_from_string(doc.at("direction").get<std::string>());
  r.tuned_flags = doc.at("tuned_flags").get<std::vector<std::string>>();
  r.best_config = config_from(doc.at("best_config"));
  r.best_value = doc.at("best_value").get<double>();
  r.default_value = doc.at("default_value").get<double>();
  r.speedup = doc.at("speedup").get<double>();
  r.real_executions = doc.at("real_executions").get<std::size_t>();
  r.default_runs = doc.value("default_runs", std::size_t{1});
  r.failed_executions = doc.value("failed_executions", std::size_t{0});
  r.model_evaluations = doc.value("model_evaluations", std::size_t{0});
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
    return doc.at(key).get<double>();
  };
  r.initial_incumbent = opt("initial_incumbent");
  r.predicted_value = opt("predicted_value");
  r.confirmed_value = opt("confirmed_value");
  for (const auto& h : doc.value("hyperparameters", nlohmann::json::array()))
    r.hyperparameter_log.push_back({h.at("length_scale").get<double>(), h.at("signal_var").get<double>(), h.at("noise_var").get<double>()});
  for (const auto& t : doc.value("trajectory", nlohmann::json::array())) {
    TrajectoryEntry e;
    e.iteration = t.at("iteration").get<int>();
    e.phase = t.at("phase").get<std::string>();
    e.config = config_from(t.at("config"));
    e.value = t.at("value").get<double>();
    e.incumbent = t.at("incumbent").get<double>();
    e.failed = t.at("failed").get<bool>();
    if (!t.at("predicted").is_null()) e.predicted = t.at("predicted").get<double>();
    r.trajectory.push_back(std::move(e));
  }
  return r;
}

std::string trajectory_csv(const TuningReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,phase,value,incumbent,failed\n";
  for (const auto& t : report.trajectory)
    out << t.iteration << ',' << t.phase << ',' << t.value << ',' << t.incumbent << ',' << (t.failed ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace flagtune
