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

// Running a target under a configuration and recording its metrics.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flagtune/flagspace.hpp"
#include "flagtune/virtual_target.hpp"

namespace flagtune {

enum class TrialStatus { ok, timeout, crashed };

std::string_view to_string(TrialStatus status) noexcept;
TrialStatus trial_status_from_string(std::string_view text);

struct TrialRecord {
  Configuration config;
  std::map<std::string, double> metrics;
  TrialStatus status = TrialStatus::ok;
  double wall_clock_s = 0.0;
  std::int64_t timestamp_ms = 0;  // Unix epoch; 0 for virtual targets
  std::string note;               // failure reason, if any

  bool ok() const noexcept { return status == TrialStatus::ok; }
};

nlohmann::json trial_to_json(const TrialRecord& trial);
TrialRecord trial_from_json(const nlohmann::json& doc);

// Anything that can score a configuration of the full flag space.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  virtual const FlagSpace& space() const = 0;
  virtual TrialRecord run(const Configuration& config, std::uint64_t seed) = 0;

  // Number of run() calls so far.
  std::size_t trials() const noexcept { return trials_; }

 protected:
  void count_trial() noexcept { ++trials_; }

 private:
  std::size_t trials_ = 0;
};

// Well-known probe names. "stdout:NAME" reads the last `NAME=<number>` line
// the target prints.
inline constexpr std::string_view kTimeProbe = "time";
inline constexpr std::string_view kHeapProbe = "heap";

struct HeapProbe {
  // "{pid}" is replaced by the target's process id.
  std::vector<std::string> command = {"jstat", "-gc", "{pid}"};
  double cadence_s = 5.0;
};

struct TargetSpec {
  // Exactly one occurrence of "{flags}". A bare "{flags}" element expands
  // to one argv entry per flag; inside a longer string the flags are joined
  // with spaces.
  std::vector<std::string> command;
  std::filesystem::path working_dir;
  double timeout_s = 3600.0;
  int repeat = 1;
  std::vector<std::string> probes = {std::string(kTimeProbe)};
  std::map<std::string, std::string> env;
  HeapProbe heap;

  void validate() const;
};

inline constexpr std::string_view kFlagsPlaceholder = "{flags}";

// argv with rendered flags spliced in.
std::vector<std::string> expand_command(const TargetSpec& target, const std::vector<std::string>& flags);

// True when the command's program can be found (PATH lookup for bare names).
bool target_resolvable(const TargetSpec& target);

// Launches real processes. One trial at a time per executor.
class ProcessExecutor final : public Evaluator {
 public:
  ProcessExecutor(TargetSpec target, FlagSpace space);

  const FlagSpace& space() const override { return space_; }
  const TargetSpec& target() const noexcept { return target_; }
  TrialRecord run(const Configuration& config, std::uint64_t seed) override;

  // Processes launched so far (targets only, not probes).
  std::size_t launches() const noexcept { return launches_; }

 private:
  TargetSpec target_;
  FlagSpace space_;
  std::size_t launches_ = 0;
  std::mutex mutex_;
};

// Evaluates a VirtualTarget over the encoded configuration; no subprocess.
class VirtualExecutor final : public Evaluator {
 public:
  VirtualExecutor(VirtualTarget target, FlagSpace space, std::string metric = std::string(kTimeProbe));

  const FlagSpace& space() const override { return space_; }
  const VirtualTarget& target() const noexcept { return target_; }
  const std::string& metric() const noexcept { return metric_; }
  TrialRecord run(const Configuration& config, std::uint64_t seed) override;

 private:
  VirtualTarget target_;
  FlagSpace space_;
  std::string metric_;
};

// Appends every trial to a JSON-lines stream.
class RecordingEvaluator final : public Evaluator {
 public:
  RecordingEvaluator(Evaluator& inner, std::ostream& log) : inner_(inner), log_(log) {}

  const FlagSpace& space() const override { return inner_.space(); }
  TrialRecord run(const Configuration& config, std::uint64_t seed) override;

 private:
  Evaluator& inner_;
  std::ostream& log_;
};

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  double wall_clock_s = 0.0;
  std::string output;  // stdout and stderr
};

// Runs argv to completion (or timeout), capturing its output.
ProcessResult run_process(const std::vector<std::string>& argv, double timeout_s,
                          const std::filesystem::path& working_dir = {},
                          const std::map<std::string, std::string>& env = {});

}  // namespace flagtune
