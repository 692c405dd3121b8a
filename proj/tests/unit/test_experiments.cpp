#include "nvtel/experiments.hpp"

#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace nvtel;

TEST_CASE("analytic teleportation runs hit the headline numbers") {
  TeleportRunOptions opts;  // analytic, six states

  TeleportRunResult ideal = run_teleportation(ModelParams::ideal(), opts);
  CHECK(ideal.mean_fidelity.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ideal.no_feedforward.value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(ideal.mean_fidelity.std_error == 0.0);

  TeleportRunResult defaults = run_teleportation(ModelParams{}, opts);
  CHECK(std::abs(defaults.mean_fidelity.value - 0.77) < 0.02);
  CHECK(std::abs(defaults.no_feedforward.value - 0.50) < 0.01);

  opts.protocol.corrected_initialization = true;
  TeleportRunResult corrected = run_teleportation(ModelParams{}, opts);
  CHECK(std::abs(corrected.mean_fidelity.value - 0.86) < 0.02);
  CHECK(corrected.w_minus1 == 1.0);
}

TEST_CASE("outcome distribution deviates from uniform through readout asymmetry") {
  TeleportRunOptions opts;
  TeleportRunResult res = run_teleportation(ModelParams{}, opts);
  double lo = 1.0, hi = 0.0;
  double sum = 0.0;
  for (double p : res.outcome_distribution) {
    lo = std::min(lo, p);
    hi = std::max(hi, p);
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(hi - lo > 0.01);
}

TEST_CASE("per-outcome fidelities are mutually consistent at the default point") {
  TeleportRunOptions opts;
  TeleportRunResult res = run_teleportation(ModelParams{}, opts);
  for (const StateRunResult& s : res.per_state)
    for (int o = 0; o < 4; ++o)
      CHECK(std::abs(s.outcome_fidelity[o] - s.fidelity.value) < 0.12);
}

TEST_CASE("record reanalysis implements the fixed-rotation rule") {
  auto record = [](StateLabel l, int n, int e, int declared) {
    TeleportRecord r;
    r.input_label = l;
    r.outcome = BsmOutcome{n, e};
    r.bob_declared_bit = declared;
    FeedForwardOp ff = feed_forward(r.outcome, l);
    r.success_bit = declared == ff.ideal_bit;
    return r;
  };

  // (+x, 01) carries the positive-sense y: reanalysis leaves the bit alone
  std::vector<TeleportRecord> keep = {record(StateLabel::plus_x, 0, 1, 0),
                                      record(StateLabel::plus_x, 0, 1, 1)};
  CHECK(reanalyze_no_feedforward(keep).value == doctest::Approx(0.5));
  CHECK(reanalyze_no_feedforward({keep[0]}).value == doctest::Approx(1.0));

  // (+z, 01) carries Y: the declared bit is inverted
  std::vector<TeleportRecord> flip = {record(StateLabel::plus_z, 0, 1, 0)};
  CHECK(reanalyze_no_feedforward(flip).value == doctest::Approx(0.0));
  CHECK_THROWS_AS(reanalyze_no_feedforward({}), std::invalid_argument);
}

TEST_CASE("readout correction inverts the confusion model") {
  CorrectedCounts perfect = readout_correction(3, 1, 1.0, 1.0);
  CHECK(perfect.c0 == doctest::Approx(0.75).epsilon(1e-15));

  // forward-then-invert with exactly representable fractions
  CorrectedCounts rt = readout_correction(305, 695, 0.9, 0.95);
  CHECK(rt.c0 == doctest::Approx(0.3).epsilon(1e-12));

  CorrectedCounts paper = readout_correction(750, 250, 0.963, 0.963);
  CHECK(paper.c0 ==
        doctest::Approx((0.75 - 0.037) / 0.926).epsilon(1e-12));

  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    double c0 = uni(rng);
    double f0 = 0.8 + 0.2 * uni(rng);
    double f1 = 0.8 + 0.2 * uni(rng);
    double p0 = f0 * c0 + (1.0 - f1) * (1.0 - c0);
    const std::int64_t n = 1ll << 52;
    std::int64_t n0 = std::llround(p0 * static_cast<double>(n));
    CorrectedCounts rec = readout_correction(n0, n - n0, f0, f1, 0.0, 0.0);
    CHECK(std::abs(rec.c0 - c0) < 1e-12);
  }

  CHECK_THROWS_AS(readout_correction(1, 1, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(readout_correction(0, 0, 0.9, 0.9), std::invalid_argument);

  CorrectedCounts clamped = readout_correction(1000, 0, 0.9, 0.9);
  CHECK(clamped.clamped);
  CHECK(clamped.c0 == 1.0);
}

TEST_CASE("readout correction error propagation") {
  // binomial part shrinks with counts, fidelity part persists
  CorrectedCounts small = readout_correction(75, 25, 0.963, 0.963);
  CorrectedCounts large = readout_correction(750000, 250000, 0.963, 0.963);
  CHECK(small.std_error > large.std_error);
  CorrectedCounts no_f = readout_correction(750000, 250000, 0.963, 0.963, 0.0, 0.0);
  CHECK(large.std_error > no_f.std_error);
}

TEST_CASE("single-qubit tomography by linear inversion") {
  TomographyResult pole = tomography_1q(0.0, 0.0, 1.0);
  CHECK(pole.physical);
  CHECK(pole.rho.matrix(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));

  TomographyResult minus_y = tomography_1q(0.0, -1.0, 0.0);
  CHECK(minus_y.rho.matrix(0, 1).imag() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(minus_y.rho.matrix(0, 1).real() == doctest::Approx(0.0).epsilon(1e-12));

  // the measured matrix entries reproduce from their back-derived expectations
  TomographyResult fig = tomography_1q(0.10, 0.56, 0.04);
  CHECK(fig.rho.matrix(0, 0).real() == doctest::Approx(0.52).epsilon(1e-12));
  CHECK(fig.rho.matrix(0, 1).real() == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(fig.rho.matrix(0, 1).imag() == doctest::Approx(-0.28).epsilon(1e-12));

  TomographyResult bad = tomography_1q(0.9, 0.9, 0.9);
  CHECK_FALSE(bad.physical);
  CHECK_THROWS_AS(tomography_1q(1.5, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("tomography inverts exact expectation extraction") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    DensityState rho{oracles::random_density(rng, 2), {Slot::electron_b}};
    TomographyResult rec = tomography_1q(pauli_expectation(rho, Axis::X),
                                         pauli_expectation(rho, Axis::Y),
                                         pauli_expectation(rho, Axis::Z));
    CHECK((rec.rho.matrix - rho.matrix).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("calibration sweep recovers injected phase offsets") {
  std::vector<double> grid;
  for (int i = 0; i < 41; ++i) grid.push_back(-kPi + 2.0 * kPi * i / 40.0);
  const double step = grid[1] - grid[0];

  SweepResult calibrated =
      calibration_sweep(ModelParams{}, SweepParameter::rotation_axis_phase, grid);
  CHECK_FALSE(calibrated.fit.degenerate);
  CHECK(std::abs(calibrated.optimum) < step);
  CHECK(calibrated.fit.residual_rms < 1e-6);

  ModelParams miscal;
  miscal.phase_lambda = 0.8;
  SweepResult shifted =
      calibration_sweep(miscal, SweepParameter::rotation_axis_phase, grid);
  CHECK(std::abs(shifted.optimum + 0.8) < step);
  CHECK(shifted.fit.residual_rms < 1e-6);
}

TEST_CASE("evolution-time sweep compensates the kappa phase") {
  ModelParams params;
  params.phase_kappa = 0.3;
  const double period = 2.0 * kPi / params.hyperfine_a;
  std::vector<double> grid;
  for (int i = 0; i < 81; ++i) grid.push_back(period * i / 80.0);
  const double step = grid[1] - grid[0];

  SweepResult res =
      calibration_sweep(params, SweepParameter::evolution_time, grid);
  CHECK(res.fit.residual_rms < 1e-6);
  const double expected = (2.0 * kPi - params.phase_kappa) / params.hyperfine_a;
  CHECK(std::abs(res.optimum - expected) < step);

  // shifting all evolution times by a full period changes nothing physical
  std::vector<double> shifted_grid = grid;
  for (double& t : shifted_grid) t += period;
  SweepResult shifted =
      calibration_sweep(params, SweepParameter::evolution_time, shifted_grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(shifted.objective[i] - res.objective[i]) < 1e-9);
  CHECK(std::abs(shifted.optimum - (res.optimum + period)) < step);
}

TEST_CASE("aliased evolution grid is flagged as degenerate") {
  ModelParams params;
  const double period = 2.0 * kPi / params.hyperfine_a;
  std::vector<double> grid = {0.0, period, 2.0 * period, 3.0 * period};
  SweepResult res = calibration_sweep(params, SweepParameter::evolution_time, grid);
  CHECK(res.fit.degenerate);
  CHECK_THROWS_AS(
      calibration_sweep(params, SweepParameter::evolution_time, {}),
      std::invalid_argument);
}

TEST_CASE("monte carlo std errors scale as one over sqrt(shots)") {
  ModelParams params;
  TeleportRunOptions opts;
  opts.mode = RunMode::monte_carlo;
  opts.labels = {StateLabel::plus_x};
  opts.seed = 61;
  opts.shots = 2000;
  FidelityEstimate small =
      run_teleportation(params, opts).per_state[0].declared_success;
  opts.shots = 200000;
  FidelityEstimate large =
      run_teleportation(params, opts).per_state[0].declared_success;
  CHECK(small.std_error / large.std_error ==
        doctest::Approx(10.0).epsilon(0.10));
}

TEST_CASE("bsm benchmark endpoints and default working point") {
  BsmBenchmarkOptions opts;
  BsmBenchmarkResult ideal = bsm_benchmark(ModelParams::ideal(), opts);
  for (double p : ideal.p_ideal) CHECK(p == doctest::Approx(1.0).epsilon(1e-9));

  BsmBenchmarkResult defaults = bsm_benchmark(ModelParams{}, opts);
  CHECK(std::abs(defaults.mean - 0.90) < 0.02);
  for (double p : defaults.p_ideal) {
    CHECK(p > 0.85);
    CHECK(p < 1.0);
  }

  // perfect readout with the default CNOT errors sits strictly between
  ModelParams readout_free;
  readout_free.f_ro_e0_alice = 1.0;
  readout_free.f_ro_e1_alice = 1.0;
  BsmBenchmarkResult partial = bsm_benchmark(readout_free, opts);
  CHECK(partial.mean > defaults.mean + 1e-6);
  CHECK(partial.mean < 1.0 - 1e-6);
}

TEST_CASE("benchmark monte carlo estimates track the analytic probabilities") {
  ModelParams params;
  BsmBenchmarkOptions analytic_opts;
  BsmBenchmarkResult analytic = bsm_benchmark(params, analytic_opts);
  BsmBenchmarkOptions mc_opts;
  mc_opts.mode = RunMode::monte_carlo;
  mc_opts.shots = 20000;
  mc_opts.seed = 62;
  BsmBenchmarkResult mc = bsm_benchmark(params, mc_opts);
  for (int b = 0; b < 4; ++b) {
    double se = std::sqrt(analytic.p_ideal[b] * (1.0 - analytic.p_ideal[b]) /
                          mc_opts.shots);
    CHECK(std::abs(mc.p_ideal[b] - analytic.p_ideal[b]) < 4.0 * se);
  }
}

TEST_CASE("teleport ensembles agree between modes at the default point") {
  ModelParams params;
  TeleportRunOptions analytic_opts;
  TeleportRunResult analytic = run_teleportation(params, analytic_opts);

  TeleportRunOptions mc_opts;
  mc_opts.mode = RunMode::monte_carlo;
  mc_opts.shots = 20000;
  mc_opts.seed = 63;
  mc_opts.workers = 2;
  TeleportRunResult mc = run_teleportation(params, mc_opts);

  for (std::size_t li = 0; li < analytic.per_state.size(); ++li) {
    const StateRunResult& a = analytic.per_state[li];
    const StateRunResult& m = mc.per_state[li];
    double se = std::sqrt(a.declared_success.value *
                          (1.0 - a.declared_success.value) / mc_opts.shots);
    CHECK(std::abs(m.declared_success.value - a.declared_success.value) <
          4.0 * se);
    for (int o = 0; o < 4; ++o) {
      double p = a.outcome_probability[o];
      double ose = std::sqrt(p * (1.0 - p) / mc_opts.shots);
      CHECK(std::abs(m.outcome_probability[o] - p) < 4.0 * ose);
    }
  }
  double se_noff = std::sqrt(analytic.no_feedforward.value *
                             (1.0 - analytic.no_feedforward.value) /
                             static_cast<double>(mc.no_feedforward.n_shots));
  CHECK(std::abs(mc.no_feedforward.value - analytic.no_feedforward.value) <
        4.0 * se_noff);
}

TEST_CASE("worker count does not change monte carlo results") {
  ModelParams params;
  TeleportRunOptions opts;
  opts.mode = RunMode::monte_carlo;
  opts.shots = 5000;
  opts.seed = 64;
  opts.labels = {StateLabel::plus_z, StateLabel::minus_y};
  opts.workers = 1;
  TeleportRunResult one = run_teleportation(params, opts);
  opts.workers = 4;
  TeleportRunResult four = run_teleportation(params, opts);
  for (std::size_t li = 0; li < opts.labels.size(); ++li) {
    CHECK(one.per_state[li].declared_success.value ==
          four.per_state[li].declared_success.value);
    for (int o = 0; o < 4; ++o)
      CHECK(one.per_state[li].outcome_counts[o] ==
            four.per_state[li].outcome_counts[o]);
  }
}

TEST_CASE("per-label shot overrides replay measured sample sizes") {
  ModelParams params;
  TeleportRunOptions opts;
  opts.mode = RunMode::monte_carlo;
  opts.seed = 65;
  opts.shots_per_label = {54, 89, 73, 49, 52, 47};
  TeleportRunResult res = run_teleportation(params, opts);
  for (std::size_t li = 0; li < res.per_state.size(); ++li) {
    CHECK(res.per_state[li].declared_success.n_shots ==
          opts.shots_per_label[li]);
    // uncertainty magnitude matches the binomial scale of the sample size
    CHECK(res.per_state[li].declared_success.std_error > 0.02);
    CHECK(res.per_state[li].declared_success.std_error < 0.12);
  }
}

TEST_CASE("nuclear flip curve generation and fit recovery") {
  ModelParams params;  // p_flip_cycle = 0.0017
  FlipCurveOptions opts;
  opts.attempts_max = 4000.0;
  opts.points = 101;
  FlipCurveResult res = nuclear_flip_curve(params, opts);
  CHECK(res.fit_ok);
  CHECK(std::abs(res.fitted_p_flip - params.p_flip_cycle) <
        0.05 * params.p_flip_cycle);
  CHECK(res.p_minus1.front() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.attempts.back() == doctest::Approx(4000.0));

  ModelParams frozen;
  frozen.p_flip_cycle = 0.0;
  FlipCurveResult flat = nuclear_flip_curve(frozen, opts);
  for (double v : flat.p_minus1) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(flat.fit_ok);
}

TEST_CASE("dressed flip curve reproduces the uncorrected shape") {
  ModelParams params;
  FlipCurveOptions opts;
  opts.attempts_max = 6000.0;
  opts.points = 121;
  opts.dress_scale = 0.83;
  opts.dress_offset = 0.13;
  FlipCurveResult res = nuclear_flip_curve(params, opts);
  CHECK(res.p_minus1.front() == doctest::Approx(0.96).epsilon(1e-12));
  CHECK(res.p_minus1.back() < 0.45);
  CHECK(res.p_minus1.back() > 0.40);
  CHECK(res.fit_ok);
  CHECK(std::abs(res.fitted_p_flip - params.p_flip_cycle) <
        0.05 * params.p_flip_cycle);
  CHECK(res.fitted_scale == doctest::Approx(0.83).epsilon(1e-3));
  CHECK(res.fitted_offset == doctest::Approx(0.13).epsilon(1e-2));
}

TEST_CASE("teleportation tomography of the +y input") {
  ModelParams ideal = ModelParams::ideal();
  TomographyRunResult perfect =
      teleport_tomography(ideal, StateLabel::plus_y, RunMode::analytic, 0, 0);
  CHECK(perfect.ex == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(perfect.ey == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(perfect.ez == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(perfect.reconstruction.physical);

  ModelParams params;
  TomographyRunResult defaults =
      teleport_tomography(params, StateLabel::plus_y, RunMode::analytic, 0, 0);
  // the target aligns with +y; its transverse components stay small
  CHECK(defaults.ey > 0.4);
  CHECK(defaults.ey < 0.7);
  CHECK(std::abs(defaults.ex) < 0.05);
  CHECK(std::abs(defaults.ez) < 0.05);

  TomographyRunResult mc = teleport_tomography(params, StateLabel::plus_y,
                                               RunMode::monte_carlo, 60000, 66);
  CHECK(std::abs(mc.ey - defaults.ey) < 4.0 * mc.se_ey + 1e-9);
  CHECK(std::abs(mc.ex - defaults.ex) < 4.0 * mc.se_ex + 1e-9);
}
