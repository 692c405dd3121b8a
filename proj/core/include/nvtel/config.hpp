#pragma once

#include "nvtel/experiments.hpp"
#include "nvtel/model.hpp"
#include "nvtel/protocol.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvtel {

enum class ExperimentKind {
  teleport,
  bsm_benchmark,
  calibrate,
  nuclear_flips,
  tomography,
  link_rate
};
std::string experiment_name(ExperimentKind k);
std::optional<ExperimentKind> parse_experiment(const std::string& name);

// Thrown for unparsable or invalid configuration; carries the offending key
// and 1-based line (0 when not tied to a line).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string message, std::string key = {}, int line = 0);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

struct RunConfig {
  ModelParams model{};
  ExperimentKind experiment = ExperimentKind::teleport;
  RunMode mode = RunMode::analytic;
  std::int64_t shots = 100000;
  std::uint64_t seed = 12345;
  int workers = 1;
  std::string out_dir = "out";

  // teleport
  bool corrected_initialization = false;
  bool no_feedforward_reanalysis = true;
  DecouplingChannel decoupling_channel = DecouplingChannel::depolarizing;
  std::vector<std::int64_t> shots_per_label;  // empty = use `shots`

  // calibrate; start/stop unset = one full period of the swept knob
  SweepParameter sweep_parameter = SweepParameter::rotation_axis_phase;
  std::optional<double> sweep_start;
  std::optional<double> sweep_stop;
  int sweep_points = 41;

  // nuclear-flips
  double flips_attempts_max = 2000.0;
  int flips_points = 81;
  double flips_dress_scale = 1.0;
  double flips_dress_offset = 0.0;

  // tomography
  StateLabel tomography_label = StateLabel::plus_y;

  // bsm-benchmark
  bool benchmark_ideal_preparation = false;
  bool benchmark_averaged_populations = false;

  // link-rate
  std::int64_t link_samples = 100000;

  bool operator==(const RunConfig&) const = default;
  // full cross-field validation; throws ConfigError naming the key
  void validate() const;
};

// Parse the key = value configuration text. Unknown keys, bad values and
// range violations raise ConfigError with key and line. An empty file yields
// the full default configuration.
RunConfig parse_config(const std::string& text,
                       const std::string& source_name = "<config>");
RunConfig load_config(const std::string& path);

// Serialization that parses back to an identical RunConfig.
std::string save_config(const RunConfig& config);

// Command-line overrides, applied on top of file values.
struct ConfigOverrides {
  std::optional<std::string> experiment;
  std::optional<std::string> mode;
  std::optional<std::int64_t> shots;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
};
void apply_overrides(RunConfig& config, const ConfigOverrides& overrides);

}  // namespace nvtel
