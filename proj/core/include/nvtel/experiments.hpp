#pragma once

#include "nvtel/link.hpp"
#include "nvtel/model.hpp"
#include "nvtel/protocol.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace nvtel {

enum class RunMode { analytic, monte_carlo };
enum class EstimateMethod { analytic, monte_carlo, readout_corrected };
std::string run_mode_name(RunMode m);
std::string estimate_method_name(EstimateMethod m);

struct FidelityEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 in analytic mode
  std::int64_t n_shots = 0;
  EstimateMethod method = EstimateMethod::analytic;
};

// ---------------------------------------------------------------------------
// Teleportation ensembles.

struct StateRunResult {
  StateLabel label = StateLabel::plus_z;
  // state fidelity of Bob's corrected qubit (readout-corrected in MC mode)
  FidelityEstimate fidelity;
  // raw probability that Bob's declared bit matches the table's ideal result
  FidelityEstimate declared_success;
  std::array<double, 4> outcome_probability{};
  std::array<double, 4> outcome_fidelity{};
  std::array<std::int64_t, 4> outcome_counts{};
};

struct TeleportRunOptions {
  RunMode mode = RunMode::analytic;
  std::int64_t shots = 100000;  // per input state, Monte Carlo mode
  std::uint64_t seed = 12345;
  int workers = 1;
  TeleportOptions protocol{};
  std::vector<StateLabel> labels{kSixStates.begin(), kSixStates.end()};
  // optional per-label shot counts (e.g. to replay measured sample sizes)
  std::vector<std::int64_t> shots_per_label{};
};

struct TeleportRunResult {
  std::vector<StateRunResult> per_state;
  FidelityEstimate mean_fidelity;
  FidelityEstimate mean_declared_success;
  FidelityEstimate no_feedforward;
  std::array<double, 4> outcome_distribution{};
  double w_minus1 = 0.0, w_0 = 0.0, w_plus1 = 0.0;
  // the m_I = +1 branch is scored as a fully mixed target
  bool plus1_fully_mixed_approximation = true;
};

TeleportRunResult run_teleportation(const ModelParams& params,
                                    const TeleportRunOptions& options);

// ---------------------------------------------------------------------------
// Bell-state measurement benchmark: prepare each Bell state on Alice's
// register, run the BSM, score the probability of the ideal outcome.

struct BsmBenchmarkOptions {
  RunMode mode = RunMode::analytic;
  std::int64_t shots = 100000;
  std::uint64_t seed = 12345;
  // strip preparation imperfections (nuclear init, preparation CNOT)
  bool ideal_preparation = false;
  // weight nuclear branches by entanglement-averaged populations instead of
  // the fresh measurement-based initialization values
  bool use_averaged_populations = false;
};

struct BsmBenchmarkResult {
  std::array<double, 4> p_ideal{};  // indexed by kBellStates order
  std::array<double, 4> std_error{};
  std::array<BsmOutcome, 4> ideal_outcome{};
  std::array<std::array<double, 4>, 4> outcome_probability{};
  double mean = 0.0;
  double mean_std_error = 0.0;
};

BsmBenchmarkResult bsm_benchmark(const ModelParams& params,
                                 const BsmBenchmarkOptions& options = {});

// ---------------------------------------------------------------------------
// BSM phase calibration sweeps.

enum class SweepParameter { rotation_axis_phase, evolution_time };
std::string sweep_parameter_name(SweepParameter p);

struct SinusoidFit {
  double amplitude = 0.0;
  double phase = 0.0;  // peak position in units of the swept variable
  double offset = 0.0;
  double residual_rms = 0.0;
  bool degenerate = false;  // flat curve, no usable optimum
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::rotation_axis_phase;
  std::string parameter_name;
  std::vector<double> values;
  std::vector<std::array<double, 4>> outcome_probabilities;
  std::vector<double> objective;  // P00 + P11, the quantity maximized
  std::vector<double> fitted;     // fitted sinusoid on the grid
  SinusoidFit fit;
  double optimum = 0.0;  // maximizing setting, inside the swept range
};

// Prepares the calibration input (nitrogen in |x->, electron echo pair),
// sweeps the requested knob and fits a fixed-period sinusoid to P00 + P11.
SweepResult calibration_sweep(const ModelParams& params, SweepParameter which,
                              const std::vector<double>& grid);

// ---------------------------------------------------------------------------
// Analysis helpers.

struct CorrectedCounts {
  double c0 = 0.0;
  double c1 = 0.0;
  double std_error = 0.0;
  bool clamped = false;
};

// Invert the 2x2 readout confusion model on observed counts; propagates the
// binomial variance and the readout-fidelity uncertainties.
CorrectedCounts readout_correction(std::int64_t n0, std::int64_t n1, double f0,
                                   double f1, double sigma_f0 = 0.005,
                                   double sigma_f1 = 0.005);

struct TomographyResult {
  DensityState rho;
  bool physical = true;
  double min_eigenvalue = 0.0;
};

// Linear inversion rho = (1 + ex sx + ey sy + ez sz)/2; no projection is
// applied, unphysical reconstructions are only flagged.
TomographyResult tomography_1q(double ex, double ey, double ez,
                               Slot slot = Slot::electron_b);

// Fixed-rotation reconstruction: invert the readout result of every record
// whose feed-forward entry is a flipped-partner operation, recovering the
// statistics of a single outcome-independent readout rotation.
FidelityEstimate reanalyze_no_feedforward(const std::vector<TeleportRecord>& records);

// ---------------------------------------------------------------------------
// Nuclear depolarization curve and fit.

struct FlipCurveOptions {
  double attempts_max = 2000.0;
  int points = 81;
  // readout-error dressing of the generated curve: scale * p + offset
  double dress_scale = 1.0;
  double dress_offset = 0.0;
};

struct FlipCurveResult {
  std::vector<double> attempts;
  std::vector<double> p_minus1;
  double fitted_p_flip = 0.0;
  double fitted_scale = 1.0;
  double fitted_offset = 0.0;
  double residual_rms = 0.0;
  bool fit_ok = false;
};

// Generate P(|1>) vs entanglement attempts from the rate model (one electron
// flip per two attempts) and fit the closed form back to it.
FlipCurveResult nuclear_flip_curve(const ModelParams& params,
                                   const FlipCurveOptions& options = {});

// ---------------------------------------------------------------------------
// Single-state teleportation tomography.

struct TomographyRunResult {
  StateLabel label = StateLabel::plus_y;
  double ex = 0.0, ey = 0.0, ez = 0.0;
  double se_ex = 0.0, se_ey = 0.0, se_ez = 0.0;
  std::int64_t shots_per_basis = 0;
  TomographyResult reconstruction;
};

// Teleport one canonical state and tomograph Bob's outcome-aligned target
// state (basis rotations conditioned on the BSM outcome).
TomographyRunResult teleport_tomography(const ModelParams& params,
                                        StateLabel label, RunMode mode,
                                        std::int64_t shots, std::uint64_t seed,
                                        const TeleportOptions& options = {});

}  // namespace nvtel
