#include "nvtel/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace nvtel {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  double out;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + v + "'");
  }
  if (used != v.size())
    throw std::invalid_argument("trailing characters after number '" + v + "'");
  return out;
}

std::int64_t to_int(const std::string& v) {
  std::size_t used = 0;
  std::int64_t out;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  }
  if (used != v.size())
    throw std::invalid_argument("trailing characters after integer '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& v) {
  std::size_t used = 0;
  std::uint64_t out;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an unsigned integer, got '" + v + "'");
  }
  if (used != v.size())
    throw std::invalid_argument("trailing characters after integer '" + v + "'");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true/false, got '" + v + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

RunMode to_mode(const std::string& v) {
  if (v == "analytic") return RunMode::analytic;
  if (v == "monte_carlo" || v == "monte-carlo") return RunMode::monte_carlo;
  throw std::invalid_argument("expected analytic or monte_carlo, got '" + v + "'");
}

DecouplingChannel to_channel(const std::string& v) {
  if (v == "depolarize" || v == "depolarizing") return DecouplingChannel::depolarizing;
  if (v == "dephase" || v == "dephasing") return DecouplingChannel::dephasing;
  throw std::invalid_argument("expected depolarize or dephase, got '" + v + "'");
}

SweepParameter to_sweep(const std::string& v) {
  if (v == "rotation_axis_phase") return SweepParameter::rotation_axis_phase;
  if (v == "evolution_time") return SweepParameter::evolution_time;
  throw std::invalid_argument(
      "expected rotation_axis_phase or evolution_time, got '" + v + "'");
}

StateLabel to_label(const std::string& v) {
  auto l = parse_label(v);
  if (!l) throw std::invalid_argument("expected one of +z -z +x -x +y -y, got '" + v + "'");
  return *l;
}

std::vector<std::int64_t> to_int_list(const std::string& v) {
  std::vector<std::int64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::invalid_argument("empty list entry");
    out.push_back(to_int(item));
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.experiment",
       [](RunConfig& c, const std::string& v) {
         auto e = parse_experiment(v);
         if (!e) throw std::invalid_argument("unknown experiment '" + v + "'");
         c.experiment = *e;
       }},
      {"run.mode", [](RunConfig& c, const std::string& v) { c.mode = to_mode(v); }},
      {"run.shots", [](RunConfig& c, const std::string& v) { c.shots = to_int(v); }},
      {"run.seed", [](RunConfig& c, const std::string& v) { c.seed = to_uint(v); }},
      {"run.workers",
       [](RunConfig& c, const std::string& v) { c.workers = static_cast<int>(to_int(v)); }},
      {"run.out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},

      {"model.hyperfine_a_rad_s",
       [](RunConfig& c, const std::string& v) { c.model.hyperfine_a = to_double(v); }},
      {"model.t2_star_s",
       [](RunConfig& c, const std::string& v) { c.model.t2_star = to_double(v); }},
      {"model.cnot_error_minus1",
       [](RunConfig& c, const std::string& v) { c.model.cnot_error_minus1 = to_double(v); }},
      {"model.cnot_error_0",
       [](RunConfig& c, const std::string& v) { c.model.cnot_error_0 = to_double(v); }},
      {"model.phase_lambda_rad",
       [](RunConfig& c, const std::string& v) { c.model.phase_lambda = to_double(v); }},
      {"model.phase_kappa_rad",
       [](RunConfig& c, const std::string& v) { c.model.phase_kappa = to_double(v); }},
      {"model.f_ro_e0_alice",
       [](RunConfig& c, const std::string& v) { c.model.f_ro_e0_alice = to_double(v); }},
      {"model.f_ro_e1_alice",
       [](RunConfig& c, const std::string& v) { c.model.f_ro_e1_alice = to_double(v); }},
      {"model.f_ro_e0_bob",
       [](RunConfig& c, const std::string& v) { c.model.f_ro_e0_bob = to_double(v); }},
      {"model.f_ro_e1_bob",
       [](RunConfig& c, const std::string& v) { c.model.f_ro_e1_bob = to_double(v); }},
      {"model.f_dd",
       [](RunConfig& c, const std::string& v) { c.model.f_dd = to_double(v); }},
      {"model.visibility",
       [](RunConfig& c, const std::string& v) { c.model.visibility = to_double(v); }},
      {"model.p_flip_cycle",
       [](RunConfig& c, const std::string& v) { c.model.p_flip_cycle = to_double(v); }},
      {"model.init_p_plus1",
       [](RunConfig& c, const std::string& v) { c.model.init_populations.p_plus1 = to_double(v); }},
      {"model.init_p_0",
       [](RunConfig& c, const std::string& v) { c.model.init_populations.p_0 = to_double(v); }},
      {"model.init_p_minus1",
       [](RunConfig& c, const std::string& v) { c.model.init_populations.p_minus1 = to_double(v); }},
      {"model.max_attempts_m",
       [](RunConfig& c, const std::string& v) { c.model.max_attempts_m = static_cast<int>(to_int(v)); }},
      {"model.p_succ",
       [](RunConfig& c, const std::string& v) { c.model.p_succ = to_double(v); }},
      {"model.attempt_duration_s",
       [](RunConfig& c, const std::string& v) { c.model.attempt_duration = to_double(v); }},
      {"model.reinit_overhead_s",
       [](RunConfig& c, const std::string& v) { c.model.reinit_overhead = to_double(v); }},

      {"teleport.corrected_initialization",
       [](RunConfig& c, const std::string& v) { c.corrected_initialization = to_bool(v); }},
      {"teleport.no_feedforward_reanalysis",
       [](RunConfig& c, const std::string& v) { c.no_feedforward_reanalysis = to_bool(v); }},
      {"teleport.decoupling_channel",
       [](RunConfig& c, const std::string& v) { c.decoupling_channel = to_channel(v); }},
      {"teleport.shots_per_label",
       [](RunConfig& c, const std::string& v) { c.shots_per_label = to_int_list(v); }},

      {"calibrate.parameter",
       [](RunConfig& c, const std::string& v) { c.sweep_parameter = to_sweep(v); }},
      {"calibrate.start",
       [](RunConfig& c, const std::string& v) { c.sweep_start = to_double(v); }},
      {"calibrate.stop",
       [](RunConfig& c, const std::string& v) { c.sweep_stop = to_double(v); }},
      {"calibrate.points",
       [](RunConfig& c, const std::string& v) { c.sweep_points = static_cast<int>(to_int(v)); }},

      {"flips.attempts_max",
       [](RunConfig& c, const std::string& v) { c.flips_attempts_max = to_double(v); }},
      {"flips.points",
       [](RunConfig& c, const std::string& v) { c.flips_points = static_cast<int>(to_int(v)); }},
      {"flips.dress_scale",
       [](RunConfig& c, const std::string& v) { c.flips_dress_scale = to_double(v); }},
      {"flips.dress_offset",
       [](RunConfig& c, const std::string& v) { c.flips_dress_offset = to_double(v); }},

      {"tomography.label",
       [](RunConfig& c, const std::string& v) { c.tomography_label = to_label(v); }},

      {"benchmark.ideal_preparation",
       [](RunConfig& c, const std::string& v) { c.benchmark_ideal_preparation = to_bool(v); }},
      {"benchmark.averaged_populations",
       [](RunConfig& c, const std::string& v) { c.benchmark_averaged_populations = to_bool(v); }},

      {"link.samples",
       [](RunConfig& c, const std::string& v) { c.link_samples = to_int(v); }},
  };
  return table;
}

}  // namespace

std::string experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::teleport: return "teleport";
    case ExperimentKind::bsm_benchmark: return "bsm-benchmark";
    case ExperimentKind::calibrate: return "calibrate";
    case ExperimentKind::nuclear_flips: return "nuclear-flips";
    case ExperimentKind::tomography: return "tomography";
    case ExperimentKind::link_rate: return "link-rate";
  }
  return "?";
}

std::optional<ExperimentKind> parse_experiment(const std::string& name) {
  for (ExperimentKind k :
       {ExperimentKind::teleport, ExperimentKind::bsm_benchmark,
        ExperimentKind::calibrate, ExperimentKind::nuclear_flips,
        ExperimentKind::tomography, ExperimentKind::link_rate})
    if (experiment_name(k) == name) return k;
  return std::nullopt;
}

ConfigError::ConfigError(std::string message, std::string key, int line)
    : std::runtime_error(
          (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
          (key.empty() ? "" : "key '" + key + "': ") + message),
      key_(std::move(key)),
      line_(line) {}

void RunConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (shots < 1) throw ConfigError("must be at least 1", "run.shots");
  if (workers < 1 || workers > 64)
    throw ConfigError("must lie in [1,64]", "run.workers");
  if (out_dir.empty()) throw ConfigError("must not be empty", "run.out_dir");
  if (!shots_per_label.empty()) {
    if (shots_per_label.size() != kSixStates.size())
      throw ConfigError("needs exactly 6 entries", "teleport.shots_per_label");
    for (std::int64_t s : shots_per_label)
      if (s < 1) throw ConfigError("entries must be at least 1",
                                   "teleport.shots_per_label");
  }
  if (sweep_points < 2) throw ConfigError("must be at least 2", "calibrate.points");
  if (sweep_start.has_value() != sweep_stop.has_value())
    throw ConfigError("start and stop must be given together", "calibrate.start");
  if (sweep_start && !(*sweep_start < *sweep_stop))
    throw ConfigError("start must be below stop", "calibrate.start");
  if (!(flips_attempts_max > 0))
    throw ConfigError("must be positive", "flips.attempts_max");
  if (flips_points < 2) throw ConfigError("must be at least 2", "flips.points");
  if (!std::isfinite(flips_dress_scale) || !std::isfinite(flips_dress_offset))
    throw ConfigError("must be finite", "flips.dress_scale");
  if (link_samples < 1) throw ConfigError("must be at least 1", "link.samples");
}

RunConfig parse_config(const std::string& text, const std::string& source_name) {
  RunConfig config;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line = line.substr(0, pos);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value' in " + source_name, "", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError("unknown key", key, line_no);
    try {
      it->second(config, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), key, line_no);
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string save_config(const RunConfig& c) {
  std::ostringstream out;
  out << "# resolved run configuration\n";
  out << "run.experiment = " << experiment_name(c.experiment) << "\n";
  out << "run.mode = " << run_mode_name(c.mode) << "\n";
  out << "run.shots = " << c.shots << "\n";
  out << "run.seed = " << c.seed << "\n";
  out << "run.workers = " << c.workers << "\n";
  out << "run.out_dir = " << c.out_dir << "\n";
  out << "\n";
  out << "model.hyperfine_a_rad_s = " << format_double(c.model.hyperfine_a) << "\n";
  out << "model.t2_star_s = " << format_double(c.model.t2_star) << "\n";
  out << "model.cnot_error_minus1 = " << format_double(c.model.cnot_error_minus1) << "\n";
  out << "model.cnot_error_0 = " << format_double(c.model.cnot_error_0) << "\n";
  out << "model.phase_lambda_rad = " << format_double(c.model.phase_lambda) << "\n";
  out << "model.phase_kappa_rad = " << format_double(c.model.phase_kappa) << "\n";
  out << "model.f_ro_e0_alice = " << format_double(c.model.f_ro_e0_alice) << "\n";
  out << "model.f_ro_e1_alice = " << format_double(c.model.f_ro_e1_alice) << "\n";
  out << "model.f_ro_e0_bob = " << format_double(c.model.f_ro_e0_bob) << "\n";
  out << "model.f_ro_e1_bob = " << format_double(c.model.f_ro_e1_bob) << "\n";
  out << "model.f_dd = " << format_double(c.model.f_dd) << "\n";
  out << "model.visibility = " << format_double(c.model.visibility) << "\n";
  out << "model.p_flip_cycle = " << format_double(c.model.p_flip_cycle) << "\n";
  out << "model.init_p_plus1 = " << format_double(c.model.init_populations.p_plus1) << "\n";
  out << "model.init_p_0 = " << format_double(c.model.init_populations.p_0) << "\n";
  out << "model.init_p_minus1 = " << format_double(c.model.init_populations.p_minus1) << "\n";
  out << "model.max_attempts_m = " << c.model.max_attempts_m << "\n";
  out << "model.p_succ = " << format_double(c.model.p_succ) << "\n";
  out << "model.attempt_duration_s = " << format_double(c.model.attempt_duration) << "\n";
  out << "model.reinit_overhead_s = " << format_double(c.model.reinit_overhead) << "\n";
  out << "\n";
  out << "teleport.corrected_initialization = "
      << (c.corrected_initialization ? "true" : "false") << "\n";
  out << "teleport.no_feedforward_reanalysis = "
      << (c.no_feedforward_reanalysis ? "true" : "false") << "\n";
  out << "teleport.decoupling_channel = "
      << (c.decoupling_channel == DecouplingChannel::depolarizing ? "depolarize"
                                                                  : "dephase")
      << "\n";
  if (!c.shots_per_label.empty()) {
    out << "teleport.shots_per_label = ";
    for (std::size_t i = 0; i < c.shots_per_label.size(); ++i)
      out << (i ? "," : "") << c.shots_per_label[i];
    out << "\n";
  }
  out << "\n";
  out << "calibrate.parameter = " << sweep_parameter_name(c.sweep_parameter) << "\n";
  if (c.sweep_start) out << "calibrate.start = " << format_double(*c.sweep_start) << "\n";
  if (c.sweep_stop) out << "calibrate.stop = " << format_double(*c.sweep_stop) << "\n";
  out << "calibrate.points = " << c.sweep_points << "\n";
  out << "\n";
  out << "flips.attempts_max = " << format_double(c.flips_attempts_max) << "\n";
  out << "flips.points = " << c.flips_points << "\n";
  out << "flips.dress_scale = " << format_double(c.flips_dress_scale) << "\n";
  out << "flips.dress_offset = " << format_double(c.flips_dress_offset) << "\n";
  out << "\n";
  out << "tomography.label = " << label_name(c.tomography_label) << "\n";
  out << "\n";
  out << "benchmark.ideal_preparation = "
      << (c.benchmark_ideal_preparation ? "true" : "false") << "\n";
  out << "benchmark.averaged_populations = "
      << (c.benchmark_averaged_populations ? "true" : "false") << "\n";
  out << "\n";
  out << "link.samples = " << c.link_samples << "\n";
  return out.str();
}

void apply_overrides(RunConfig& config, const ConfigOverrides& overrides) {
  if (overrides.experiment) {
    auto e = parse_experiment(*overrides.experiment);
    if (!e) throw ConfigError("unknown experiment '" + *overrides.experiment + "'",
                              "run.experiment");
    config.experiment = *e;
  }
  if (overrides.mode) {
    try {
      config.mode = to_mode(*overrides.mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), "run.mode");
    }
  }
  if (overrides.shots) config.shots = *overrides.shots;
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.workers) config.workers = *overrides.workers;
  if (overrides.out_dir) config.out_dir = *overrides.out_dir;
  config.validate();
}

}  // namespace nvtel
