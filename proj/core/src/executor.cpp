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

#include "flagtune/executor.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "flagtune/error.hpp"
#include "flagtune/heap.hpp"

namespace flagtune {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::int64_t unix_millis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::size_t count_placeholders(const std::string& s) {
  std::size_t n = 0;
  for (auto pos = s.find(kFlagsPlaceholder); pos != std::string::npos;
       pos = s.find(kFlagsPlaceholder, pos + kFlagsPlaceholder.size()))
    ++n;
  return n;
}

std::string read_all(int fd) {
  std::string out;
  ::lseek(fd, 0, SEEK_SET);
  char buf[4096];
  for (;;) {
    const auto n = ::read(fd, buf, sizeof buf);
    if (n <= 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

using Tick = std::function<void(pid_t)>;

ProcessResult launch(const std::vector<std::string>& argv, double timeout_s,
                     const std::filesystem::path& working_dir,
                     const std::map<std::string, std::string>& env, double tick_period_s,
                     const Tick& tick) {
  require(!argv.empty(), "empty command");
  char capture_path[] = "/tmp/flagtune-XXXXXX";
  const int capture = ::mkstemp(capture_path);
  if (capture < 0) fail(ErrorKind::io, "cannot create capture file");
  ::unlink(capture_path);

  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  const auto start = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(capture);
    fail(ErrorKind::target_failure, "fork failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(capture, STDOUT_FILENO);
    ::dup2(capture, STDERR_FILENO);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    if (!working_dir.empty() && ::chdir(working_dir.c_str()) != 0) ::_exit(127);
    for (const auto& [key, value] : env) ::setenv(key.c_str(), value.c_str(), 1);
    ::execvp(cargv[0], cargv.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);

  ProcessResult result;
  int status = 0;
  double next_tick = tick_period_s;
  for (;;) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    const double elapsed = seconds_since(start);
    if (elapsed >= timeout_s) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    if (tick && tick_period_s > 0.0 && elapsed >= next_tick) {
      tick(pid);
      next_tick += tick_period_s;
      continue;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  result.wall_clock_s = seconds_since(start);
  ::kill(-pid, SIGKILL);  // stray children of the target
  if (!result.timed_out) {
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
  }
  result.output = read_all(capture);
  ::close(capture);
  return result;
}

std::optional<double> stdout_metric(const std::string& output, const std::string& name) {
  std::optional<double> found;
  std::istringstream in(output);
  const std::string key = name + "=";
  for (std::string line; std::getline(in, line);) {
    const auto pos = line.rfind(key);
    if (pos == std::string::npos || (pos > 0 && !std::isspace(static_cast<unsigned char>(line[pos - 1]))))
      continue;
    const char* first = line.data() + pos + key.size();
    double v = 0;
    auto [end, ec] = std::from_chars(first, line.data() + line.size(), v);
    if (ec == std::errc{} && end != first && std::isfinite(v)) found = v;
  }
  return found;
}

std::string substitute_pid(std::string arg, pid_t pid) {
  static constexpr std::string_view token = "{pid}";
  for (auto pos = arg.find(token); pos != std::string::npos; pos = arg.find(token, pos))
    arg.replace(pos, token.size(), std::to_string(pid));
  return arg;
}

}  // namespace

std::string_view to_string(TrialStatus status) noexcept {
  switch (status) {
    case TrialStatus::ok: return "ok";
    case TrialStatus::timeout: return "timeout";
    case TrialStatus::crashed: return "crashed";
  }
  return "?";
}

TrialStatus trial_status_from_string(std::string_view text) {
  if (text == "ok") return TrialStatus::ok;
  if (text == "timeout") return TrialStatus::timeout;
  if (text == "crashed") return TrialStatus::crashed;
  fail(ErrorKind::parse, "unknown trial status '" + std::string(text) + "'");
}

nlohmann::json trial_to_json(const TrialRecord& trial) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [name, value] : trial.config)
    config[name] = std::visit([](const auto& v) { return nlohmann::json(v); }, value);
  nlohmann::json doc;
  doc["config"] = std::move(config);
  doc["metrics"] = trial.metrics;
  doc["status"] = to_string(trial.status);
  doc["wall_clock_s"] = trial.wall_clock_s;
  doc["timestamp_ms"] = trial.timestamp_ms;
  if (!trial.note.empty()) doc["note"] = trial.note;
  return doc;
}

TrialRecord trial_from_json(const nlohmann::json& doc) {
  TrialRecord trial;
  for (const auto& [name, value] : doc.at("config").items()) {
    if (value.is_boolean()) trial.config.set(name, value.get<bool>());
    else if (value.is_number_integer()) trial.config.set(name, value.get<std::int64_t>());
    else if (value.is_number()) trial.config.set(name, value.get<double>());
    else trial.config.set(name, value.get<std::string>());
  }
  trial.metrics = doc.at("metrics").get<std::map<std::string, double>>();
  trial.status = trial_status_from_string(doc.at("status").get<std::string>());
  trial.wall_clock_s = doc.value("wall_clock_s", 0.0);
  trial.timestamp_ms = doc.value("timestamp_ms", std::int64_t{0});
  trial.note = doc.value("note", std::string{});
  return trial;
}

void TargetSpec::validate() const {
  require(!command.empty(), "target command is empty");
  std::size_t placeholders = 0;
  for (const auto& arg : command) placeholders += count_placeholders(arg);
  require(placeholders == 1, "target command must contain exactly one {flags} placeholder");
  require(timeout_s > 0.0, "target timeout must be positive");
  require(repeat >= 1, "target repeat must be at least 1");
  require(heap.cadence_s > 0.0, "heap probe cadence must be positive");
  for (const auto& probe : probes) {
    require(probe == kTimeProbe || probe == kHeapProbe || probe.rfind("stdout:", 0) == 0,
            "unknown probe '" + probe + "'");
  }
}

std::vector<std::string> expand_command(const TargetSpec& target, const std::vector<std::string>& flags) {
  std::vector<std::string> argv;
  for (const auto& arg : target.command) {
    if (arg == kFlagsPlaceholder) {
      argv.insert(argv.end(), flags.begin(), flags.end());
      continue;
    }
    const auto pos = arg.find(kFlagsPlaceholder);
    if (pos == std::string::npos) {
      argv.push_back(arg);
      continue;
    }
    std::string joined;
    for (const auto& f : flags) joined += (joined.empty() ? "" : " ") + f;
    std::string expanded = arg;
    expanded.replace(pos, kFlagsPlaceholder.size(), joined);
    argv.push_back(std::move(expanded));
  }
  return argv;
}

bool target_resolvable(const TargetSpec& target) {
  if (target.command.empty()) return false;
  const std::string& program = target.command.front();
  if (program.find('/') != std::string::npos) {
    std::filesystem::path p(program);
    if (p.is_relative() && !target.working_dir.empty()) p = target.working_dir / p;
    return ::access(p.c_str(), X_OK) == 0;
  }
  const char* path = std::getenv("PATH");
  std::istringstream dirs(path ? path : "");
  for (std::string dir; std::getline(dirs, dir, ':');) {
    if (dir.empty()) dir = ".";
    const auto candidate = std::filesystem::path(dir) / program;
    if (::access(candidate.c_str(), X_OK) == 0 && !std::filesystem::is_directory(candidate)) return true;
  }
  return false;
}

ProcessResult run_process(const std::vector<std::string>& argv, double timeout_s,
                          const std::filesystem::path& working_dir,
                          const std::map<std::string, std::string>& env) {
  return launch(argv, timeout_s, working_dir, env, 0.0, {});
}

// ---------------------------------------------------------------------------

ProcessExecutor::ProcessExecutor(TargetSpec target, FlagSpace space)
    : target_(std::move(target)), space_(std::move(space)) {
  target_.validate();
}

TrialRecord ProcessExecutor::run(const Configuration& config, std::uint64_t) {
  std::lock_guard lock(mutex_);
  count_trial();
  TrialRecord record;
  record.config = config;
  record.timestamp_ms = unix_millis();
  const auto argv = expand_command(target_, render_cli_args(space_, config));
  const bool want_heap = std::find(target_.probes.begin(), target_.probes.end(), kHeapProbe) != target_.probes.end();

  std::map<std::string, double> sums;
  double wall_sum = 0.0;
  for (int r = 0; r < target_.repeat; ++r) {
    std::vector<double> usage;
    auto sample_heap = [&](pid_t pid) {
      std::vector<std::string> probe;
      for (const auto& arg : target_.heap.command) probe.push_back(substitute_pid(arg, pid));
      const auto out = run_process(probe, 30.0, target_.working_dir);
      if (out.exit_code != 0) return;
      try {
        for (const auto& s : parse_jstat_stream(out.output).samples)
          if (s.s0c + s.s1c + s.ec + s.oc > 0.0) usage.push_back(heap_usage_sample(s));
      } catch (const Error&) {
      }
    };

    ++launches_;
    pid_t last_pid = 0;
    Tick tick;
    if (want_heap) {
      tick = [&](pid_t pid) {
        last_pid = pid;
        sample_heap(pid);
      };
    }
    const auto result = launch(argv, target_.timeout_s, target_.working_dir, target_.env,
                               want_heap ? target_.heap.cadence_s : 0.0, tick);
    if (result.timed_out) {
      record.status = TrialStatus::timeout;
      record.wall_clock_s = target_.timeout_s;
      record.note = "timed out after " + format_value(target_.timeout_s) + " s";
      return record;
    }
    if (result.exit_code != 0) {
      record.status = TrialStatus::crashed;
      record.wall_clock_s = result.wall_clock_s;
      record.note = "exit status " + std::to_string(result.exit_code);
      return record;
    }
    // Runs shorter than one cadence get a single end-of-run sample.
    if (want_heap && usage.empty()) sample_heap(last_pid);

    wall_sum += result.wall_clock_s;
    for (const auto& probe : target_.probes) {
      std::optional<double> value;
      if (probe == kTimeProbe) value = result.wall_clock_s;
      else if (probe == kHeapProbe && !usage.empty()) value = aggregate_heap(usage);
      else if (probe.rfind("stdout:", 0) == 0) value = stdout_metric(result.output, probe.substr(7));
      if (!value) {
        record.status = TrialStatus::crashed;
        record.wall_clock_s = result.wall_clock_s;
        record.note = "probe " + probe + " produced no value";
        return record;
      }
      sums[probe.rfind("stdout:", 0) == 0 ? probe.substr(7) : probe] += *value;
    }
  }
  for (auto& [name, sum] : sums) record.metrics[name] = sum / target_.repeat;
  record.wall_clock_s = wall_sum / target_.repeat;
  return record;
}

// ---------------------------------------------------------------------------

VirtualExecutor::VirtualExecutor(VirtualTarget target, FlagSpace space, std::string metric)
    : target_(std::move(target)), space_(std::move(space)), metric_(std::move(metric)) {
  target_.validate();
  require(target_.dimension == space_.dimension(),
          "virtual target dimension " + std::to_string(target_.dimension) + " does not match the " +
              std::to_string(space_.dimension()) + " active flags");
}

TrialRecord VirtualExecutor::run(const Configuration& config, std::uint64_t seed) {
  count_trial();
  TrialRecord record;
  record.config = config;
  const auto x = encode(space_, config);
  record.metrics[metric_] = synthetic_eval(target_, x, seed);
  return record;
}

TrialRecord RecordingEvaluator::run(const Configuration& config, std::uint64_t seed) {
  count_trial();
  auto record = inner_.run(config, seed);
  log_ << trial_to_json(record).dump() << '\n';
  log_.flush();
  return record;
}

}  // namespace flagtune
