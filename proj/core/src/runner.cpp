#include "nvtel/runner.hpp"

#include "nvtel/experiments.hpp"
#include "nvtel/link.hpp"
#include "nvtel/protocol.hpp"
#include "nvtel/rng.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nvtel {

namespace {

using Json = nlohmann::ordered_json;

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Json estimate_json(const FidelityEstimate& e) {
  return Json{{"value", e.value},
              {"std_error", e.std_error},
              {"n_shots", e.n_shots},
              {"method", estimate_method_name(e.method)}};
}

Json model_json(const ModelParams& m) {
  return Json{{"hyperfine_a_rad_s", m.hyperfine_a},
              {"t2_star_s", m.t2_star},
              {"cnot_error_minus1", m.cnot_error_minus1},
              {"cnot_error_0", m.cnot_error_0},
              {"phase_lambda_rad", m.phase_lambda},
              {"phase_kappa_rad", m.phase_kappa},
              {"f_ro_e0_alice", m.f_ro_e0_alice},
              {"f_ro_e1_alice", m.f_ro_e1_alice},
              {"f_ro_e0_bob", m.f_ro_e0_bob},
              {"f_ro_e1_bob", m.f_ro_e1_bob},
              {"f_dd", m.f_dd},
              {"visibility", m.visibility},
              {"p_flip_cycle", m.p_flip_cycle},
              {"init_p_plus1", m.init_populations.p_plus1},
              {"init_p_0", m.init_populations.p_0},
              {"init_p_minus1", m.init_populations.p_minus1},
              {"max_attempts_m", m.max_attempts_m},
              {"p_succ", m.p_succ},
              {"attempt_duration_s", m.attempt_duration},
              {"reinit_overhead_s", m.reinit_overhead}};
}

Json bell_correspondence_json(const ModelParams& params) {
  auto map = derive_bell_correspondence(params);
  Json j;
  for (std::size_t b = 0; b < kBellStates.size(); ++b)
    j[bell_name(kBellStates[b])] = map[b].str();
  return j;
}

Json outcome_array_json(const std::array<double, 4>& values) {
  Json j;
  for (int o = 0; o < 4; ++o) j[BsmOutcome::from_index(o).str()] = values[o];
  return j;
}

struct ExperimentOutput {
  Json results;
  std::string summary;
  std::map<std::string, std::string> csv;
};

ExperimentOutput run_teleport_experiment(const RunConfig& config) {
  TeleportRunOptions opts;
  opts.mode = config.mode;
  opts.shots = config.shots;
  opts.seed = config.seed;
  opts.workers = config.workers;
  opts.protocol.corrected_initialization = config.corrected_initialization;
  opts.protocol.channel = config.decoupling_channel;
  opts.shots_per_label = config.shots_per_label;

  TeleportRunResult res = run_teleportation(config.model, opts);

  ExperimentOutput out;
  Json per_state = Json::array();
  std::ostringstream csv;
  csv << "label,fidelity,fidelity_std_error,declared_success,declared_std_error\n";
  std::ostringstream text;
  text << "teleportation (" << run_mode_name(config.mode) << " mode)\n";
  for (const StateRunResult& s : res.per_state) {
    Json js{{"label", label_name(s.label)},
            {"fidelity", estimate_json(s.fidelity)},
            {"declared_success", estimate_json(s.declared_success)},
            {"outcome_probability", outcome_array_json(s.outcome_probability)},
            {"outcome_fidelity", outcome_array_json(s.outcome_fidelity)}};
    if (config.mode == RunMode::monte_carlo) {
      Json counts;
      for (int o = 0; o < 4; ++o)
        counts[BsmOutcome::from_index(o).str()] = s.outcome_counts[o];
      js["outcome_counts"] = counts;
    }
    per_state.push_back(js);
    csv << label_name(s.label) << "," << csv_num(s.fidelity.value) << ","
        << csv_num(s.fidelity.std_error) << ","
        << csv_num(s.declared_success.value) << ","
        << csv_num(s.declared_success.std_error) << "\n";
    text << "  " << label_name(s.label) << ": fidelity " << fmt(s.fidelity.value)
         << (s.fidelity.std_error > 0 ? " +/- " + fmt(s.fidelity.std_error) : "")
         << "\n";
  }
  out.results["per_state"] = per_state;
  out.results["mean_fidelity"] = estimate_json(res.mean_fidelity);
  out.results["mean_declared_success"] = estimate_json(res.mean_declared_success);
  if (config.no_feedforward_reanalysis)
    out.results["no_feedforward"] = estimate_json(res.no_feedforward);
  out.results["outcome_distribution"] =
      outcome_array_json(res.outcome_distribution);
  out.results["branch_weights"] = Json{{"p_minus1", res.w_minus1},
                                       {"p_0", res.w_0},
                                       {"p_plus1", res.w_plus1}};

  text << "  six-state mean fidelity " << fmt(res.mean_fidelity.value, 2);
  if (res.mean_fidelity.std_error > 0)
    text << " +/- " << fmt(res.mean_fidelity.std_error, 2);
  text << "  (full precision " << fmt(res.mean_fidelity.value, 6) << ")\n";
  if (config.no_feedforward_reanalysis)
    text << "  without feed-forward: " << fmt(res.no_feedforward.value, 2)
         << "\n";
  text << "  outcome distribution:";
  for (int o = 0; o < 4; ++o)
    text << " " << BsmOutcome::from_index(o).str() << "="
         << fmt(res.outcome_distribution[o]);
  text << "\n";
  out.summary = text.str();
  out.csv["teleport_fidelities.csv"] = csv.str();
  return out;
}

ExperimentOutput run_benchmark_experiment(const RunConfig& config) {
  BsmBenchmarkOptions opts;
  opts.mode = config.mode;
  opts.shots = config.shots;
  opts.seed = config.seed;
  opts.ideal_preparation = config.benchmark_ideal_preparation;
  opts.use_averaged_populations = config.benchmark_averaged_populations;

  BsmBenchmarkResult res = bsm_benchmark(config.model, opts);

  ExperimentOutput out;
  Json per_bell = Json::array();
  std::ostringstream csv;
  csv << "bell_state,ideal_outcome,p_ideal,std_error\n";
  std::ostringstream text;
  text << "BSM benchmark (" << run_mode_name(config.mode) << " mode)\n";
  for (std::size_t b = 0; b < kBellStates.size(); ++b) {
    per_bell.push_back(Json{
        {"bell_state", bell_name(kBellStates[b])},
        {"ideal_outcome", res.ideal_outcome[b].str()},
        {"p_ideal", res.p_ideal[b]},
        {"std_error", res.std_error[b]},
        {"outcome_probability", outcome_array_json(res.outcome_probability[b])}});
    csv << bell_name(kBellStates[b]) << "," << res.ideal_outcome[b].str() << ","
        << csv_num(res.p_ideal[b]) << "," << csv_num(res.std_error[b]) << "\n";
    text << "  " << bell_name(kBellStates[b]) << " -> "
         << res.ideal_outcome[b].str() << ": " << fmt(res.p_ideal[b]) << "\n";
  }
  out.results["per_bell_state"] = per_bell;
  out.results["mean_ideal_outcome_probability"] = res.mean;
  out.results["mean_std_error"] = res.mean_std_error;
  text << "  mean ideal-outcome probability " << fmt(res.mean, 2)
       << "  (full precision " << fmt(res.mean, 6) << ")\n";
  out.summary = text.str();
  out.csv["bsm_benchmark.csv"] = csv.str();
  return out;
}

ExperimentOutput run_calibrate_experiment(const RunConfig& config) {
  double lo, hi;
  if (config.sweep_start) {
    lo = *config.sweep_start;
    hi = *config.sweep_stop;
  } else if (config.sweep_parameter == SweepParameter::rotation_axis_phase) {
    lo = -kPi;
    hi = kPi;
  } else {
    lo = 0.0;
    hi = 2.0 * kPi / config.model.hyperfine_a;
  }
  std::vector<double> grid(config.sweep_points);
  for (int i = 0; i < config.sweep_points; ++i)
    grid[i] = lo + (hi - lo) * i / (config.sweep_points - 1);

  SweepResult res = calibration_sweep(config.model, config.sweep_parameter, grid);

  ExperimentOutput out;
  out.results["parameter"] = res.parameter_name;
  out.results["optimum"] = res.optimum;
  out.results["fit"] = Json{{"amplitude", res.fit.amplitude},
                            {"phase", res.fit.phase},
                            {"offset", res.fit.offset},
                            {"residual_rms", res.fit.residual_rms},
                            {"degenerate", res.fit.degenerate}};
  Json values = Json::array(), objective = Json::array();
  for (std::size_t i = 0; i < res.values.size(); ++i) {
    values.push_back(res.values[i]);
    objective.push_back(res.objective[i]);
  }
  out.results["values"] = values;
  out.results["objective"] = objective;

  std::ostringstream csv;
  csv << "value,p00,p01,p10,p11,fit\n";
  for (std::size_t i = 0; i < res.values.size(); ++i) {
    const auto& p = res.outcome_probabilities[i];
    csv << csv_num(res.values[i]) << "," << csv_num(p[0]) << "," << csv_num(p[1])
        << "," << csv_num(p[2]) << "," << csv_num(p[3]) << ","
        << csv_num(res.fitted[i]) << "\n";
  }
  out.csv["calibration.csv"] = csv.str();

  std::ostringstream text;
  text << "BSM calibration sweep of " << res.parameter_name << "\n";
  text << "  optimum " << fmt(res.optimum, 6) << "  fit residual rms "
       << fmt(res.fit.residual_rms, 8)
       << (res.fit.degenerate ? "  [degenerate fit]" : "") << "\n";
  out.summary = text.str();
  return out;
}

ExperimentOutput run_flips_experiment(const RunConfig& config) {
  FlipCurveOptions opts;
  opts.attempts_max = config.flips_attempts_max;
  opts.points = config.flips_points;
  opts.dress_scale = config.flips_dress_scale;
  opts.dress_offset = config.flips_dress_offset;

  FlipCurveResult res = nuclear_flip_curve(config.model, opts);

  ExperimentOutput out;
  out.results["fitted_p_flip"] = res.fitted_p_flip;
  out.results["fitted_scale"] = res.fitted_scale;
  out.results["fitted_offset"] = res.fitted_offset;
  out.results["residual_rms"] = res.residual_rms;
  out.results["fit_ok"] = res.fit_ok;

  std::ostringstream csv;
  csv << "attempts,p_minus1\n";
  for (std::size_t i = 0; i < res.attempts.size(); ++i)
    csv << csv_num(res.attempts[i]) << "," << csv_num(res.p_minus1[i]) << "\n";
  out.csv["nuclear_flips.csv"] = csv.str();

  std::ostringstream text;
  text << "nuclear spin flip curve\n";
  text << "  fitted p_flip per cycle " << fmt(res.fitted_p_flip, 6)
       << (res.fit_ok ? "" : "  [fit failure]") << "\n";
  out.summary = text.str();
  return out;
}

ExperimentOutput run_tomography_experiment(const RunConfig& config) {
  TeleportOptions protocol;
  protocol.corrected_initialization = config.corrected_initialization;
  protocol.channel = config.decoupling_channel;
  TomographyRunResult res =
      teleport_tomography(config.model, config.tomography_label, config.mode,
                          config.shots, config.seed, protocol);

  ExperimentOutput out;
  const Matrix& rho = res.reconstruction.rho.matrix;
  out.results["label"] = label_name(res.label);
  out.results["expectations"] = Json{{"x", res.ex}, {"y", res.ey}, {"z", res.ez}};
  out.results["std_errors"] =
      Json{{"x", res.se_ex}, {"y", res.se_ey}, {"z", res.se_ez}};
  out.results["rho"] = Json{{"rho00", rho(0, 0).real()},
                            {"rho01_re", rho(0, 1).real()},
                            {"rho01_im", rho(0, 1).imag()},
                            {"rho11", rho(1, 1).real()}};
  out.results["physical"] = res.reconstruction.physical;
  out.results["min_eigenvalue"] = res.reconstruction.min_eigenvalue;
  if (config.mode == RunMode::monte_carlo)
    out.results["shots_per_basis"] = res.shots_per_basis;

  std::ostringstream text;
  text << "state tomography after teleporting " << label_name(res.label) << "\n";
  text << "  <sx> " << fmt(res.ex) << "  <sy> " << fmt(res.ey) << "  <sz> "
       << fmt(res.ez) << "\n";
  text << "  rho00 " << fmt(rho(0, 0).real(), 2) << "  rho01 "
       << fmt(rho(0, 1).real(), 2) << (rho(0, 1).imag() < 0 ? " - " : " + ")
       << fmt(std::abs(rho(0, 1).imag()), 2) << "i"
       << (res.reconstruction.physical ? "" : "  [unphysical]") << "\n";
  out.summary = text.str();
  return out;
}

ExperimentOutput run_link_rate_experiment(const RunConfig& config) {
  ExperimentOutput out;
  const ModelParams& m = config.model;
  out.results["expected_attempts"] = expected_attempts(m);
  out.results["expected_reinit_blocks"] = expected_reinit_blocks(m);
  out.results["expected_rate_hz"] = expected_rate(m);

  std::ostringstream text;
  text << "entanglement link throughput\n";
  text << "  expected rate " << fmt(expected_rate(m), 6) << " /s ("
       << fmt(1.0 / expected_rate(m), 1) << " s per event)\n";

  if (config.mode == RunMode::monte_carlo) {
    double sum_attempts = 0.0, sum_time = 0.0, sum_blocks = 0.0;
    for (std::int64_t i = 0; i < config.link_samples; ++i) {
      RandomStream rng(derive_seed(config.seed, 7, static_cast<std::uint64_t>(i)));
      HeraldEvent ev = sample_herald(m, rng);
      sum_attempts += static_cast<double>(ev.attempts_used);
      sum_time += ev.elapsed_time;
      sum_blocks += static_cast<double>(ev.reinit_blocks);
    }
    const double n = static_cast<double>(config.link_samples);
    out.results["mc"] = Json{{"samples", config.link_samples},
                             {"mean_attempts", sum_attempts / n},
                             {"mean_blocks", sum_blocks / n},
                             {"mean_time_s", sum_time / n},
                             {"rate_hz", n / sum_time}};
    text << "  sampled rate " << fmt(n / sum_time, 6) << " /s over "
         << config.link_samples << " heralds\n";
  }
  out.summary = text.str();
  return out;
}

}  // namespace

RunArtifacts execute(const RunConfig& config) {
  config.validate();

  ExperimentOutput out;
  switch (config.experiment) {
    case ExperimentKind::teleport: out = run_teleport_experiment(config); break;
    case ExperimentKind::bsm_benchmark: out = run_benchmark_experiment(config); break;
    case ExperimentKind::calibrate: out = run_calibrate_experiment(config); break;
    case ExperimentKind::nuclear_flips: out = run_flips_experiment(config); break;
    case ExperimentKind::tomography: out = run_tomography_experiment(config); break;
    case ExperimentKind::link_rate: out = run_link_rate_experiment(config); break;
  }

  NuclearPopulations avg = averaged_populations(config.model);
  Json report{
      {"schema_version", 1},
      {"generator", "nvteleport"},
      {"experiment", experiment_name(config.experiment)},
      {"mode", run_mode_name(config.mode)},
      {"seed", config.seed},
      {"shots", config.shots},
      {"workers", config.workers},
      {"model", model_json(config.model)},
      {"toggles",
       Json{{"corrected_initialization", config.corrected_initialization},
            {"no_feedforward_reanalysis", config.no_feedforward_reanalysis},
            {"decoupling_channel",
             config.decoupling_channel == DecouplingChannel::depolarizing
                 ? "depolarize"
                 : "dephase"},
            {"benchmark_ideal_preparation", config.benchmark_ideal_preparation},
            {"benchmark_averaged_populations",
             config.benchmark_averaged_populations}}},
      {"bell_correspondence", bell_correspondence_json(config.model)},
      {"approximations",
       Json::array({"m_I=+1 initialization branch is scored as a fully mixed "
                    "target (coin-flip readout)"})},
      {"derived",
       Json{{"p_flip_per_attempt", config.model.p_flip_cycle / 2.0},
            {"averaged_populations", Json{{"p_minus1", avg.p_minus1},
                                          {"p_0", avg.p_0},
                                          {"p_plus1", avg.p_plus1}}},
            {"expected_link_rate_hz", expected_rate(config.model)}}},
      {"results", out.results}};

  RunArtifacts artifacts;
  artifacts.report_json = report.dump(2) + "\n";
  std::ostringstream summary;
  summary << "nvteleport " << experiment_name(config.experiment) << " run\n";
  summary << "seed " << config.seed << ", mode " << run_mode_name(config.mode)
          << "\n\n";
  summary << out.summary;
  artifacts.summary_text = summary.str();
  artifacts.resolved_config = save_config(config);
  artifacts.csv_files = std::move(out.csv);
  return artifacts;
}

void write_artifacts(const RunConfig& config, const RunArtifacts& artifacts) {
  namespace fs = std::filesystem;
  fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::exists(dir))
    throw std::runtime_error("cannot create output directory '" +
                             config.out_dir + "': " + ec.message());

  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << content;
  };
  write("report.json", artifacts.report_json);
  write("summary.txt", artifacts.summary_text);
  write("resolved.cfg", artifacts.resolved_config);
  for (const auto& [name, content] : artifacts.csv_files) write(name, content);
}

void run(const RunConfig& config) {
  write_artifacts(config, execute(config));
}

}  // namespace nvtel
