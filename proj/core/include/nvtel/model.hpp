#pragma once

#include "nvtel/quantum.hpp"
#include "nvtel/rng.hpp"

#include <array>
#include <string>

namespace nvtel {

// Nuclear spin populations over m_I = +1, 0, -1. The protocol encodes
// |0> = m_I = 0 and |1> = m_I = -1; m_I = +1 lies outside the two-level
// space and is handled as a classical branch.
struct NuclearPopulations {
  double p_plus1 = 0.01;
  double p_0 = 0.02;
  double p_minus1 = 0.97;

  double sum() const { return p_plus1 + p_0 + p_minus1; }
  void validate() const;  // each in [0,1], sum 1 within 1e-12
  bool operator==(const NuclearPopulations&) const = default;
};

// Every physical parameter of the error model. Defaults reproduce the
// simulated headline numbers of the modeled experiment.
struct ModelParams {
  // parallel hyperfine coupling of Alice's electron and nitrogen, rad/s
  double hyperfine_a = 2.0 * kPi * 2.19e6;
  // electron dephasing time, seconds. Informational: its consequence is the
  // pair of CNOT error probabilities below, which are inputs here.
  double t2_star = 2e-6;
  // probability that the nitrogen-selective electron pulse fails to invert
  // the m_I = -1 manifold / fails to leave the m_I = 0 manifold alone
  double cnot_error_minus1 = 0.01;
  double cnot_error_0 = 0.01;
  // residual coherent phases of the CNOT pulse, radians. On the calibration
  // state the outcome probabilities are P00 = (1+cos lambda)/4 and
  // P11 = (1+cos(kappa + evolution phase))/4.
  double phase_lambda = 0.0;
  double phase_kappa = 0.0;
  // single-shot electron readout: f0 = P(declare 0 | m_s = 0),
  // f1 = P(declare 1 | m_s = -1). Alice's split is asymmetric (bright-state
  // detection is collection-limited, dark counts are rare); the pair is
  // constrained to mean 0.963 and a two-round nuclear readout fidelity 0.985.
  double f_ro_e0_alice = 0.928;
  double f_ro_e1_alice = 0.998;
  double f_ro_e0_bob = 0.963;
  double f_ro_e1_bob = 0.963;
  // XY4 state-preservation fidelity of Bob's electron over the BSM window
  double f_dd = 0.96;
  // photon indistinguishability; sets the entangled-link quality
  double visibility = 0.74;
  // nuclear spin flip probability per electron spin-pumping cycle
  double p_flip_cycle = 0.0017;
  NuclearPopulations init_populations{};
  // entanglement attempts before measurement-based re-initialization
  int max_attempts_m = 250;
  // per-attempt heralded entanglement success probability
  double p_succ = 1e-7;
  double attempt_duration = 10e-6;   // seconds
  double reinit_overhead = 3.75e-3;  // seconds per completed failed block

  // throws std::invalid_argument naming the offending field
  void validate() const;
  // all error channels off, unit visibility, perfect initialization
  static ModelParams ideal();
  bool operator==(const ModelParams&) const = default;
};

// ---------------------------------------------------------------------------
// Rotating-frame dynamics and gates on Alice's register.

// exp(-i H0 t) with H0 = diag(-A, 0, 0, 0) on (nitrogen_A, electron_A):
// the |00> amplitude picks up exp(+i A t), everything else is untouched.
DensityState free_evolution(const DensityState& rho, double t,
                            const ModelParams& params);

// 4x4 operator on (nitrogen_A, electron_A): rotate the nitrogen when the
// electron is in m_s = -1 (the RF resonance condition), identity otherwise.
Matrix rf_conditional_rotation(const Matrix& nuclear_rotation);

// Timing of a decoherence-protected gate: the electron echo pulse happens at
// echo_time, the gate window closes at total_time. Free-evolution phases are
// applied for both segments; wrapped (multiple of 2 pi / A) times are the
// calibrated setting.
struct GateTiming {
  double echo_time = 0.0;
  double total_time = 0.0;
};

// Nuclear rotation applied unconditionally on the electron state: the
// RF rotation (resonant only for m_s = -1) runs before and after an electron
// echo pulse, so the nitrogen is rotated in both electron branches while the
// electron phase is protected.
DensityState protected_nuclear_gate(const DensityState& rho,
                                    const Matrix& nuclear_rotation,
                                    const ModelParams& params,
                                    const GateTiming& timing = {});
// Variant with distinct first/second rotations; the first pulse carries the
// sweepable RF drive phase during calibration.
DensityState protected_nuclear_gate(const DensityState& rho,
                                    const Matrix& first_rotation,
                                    const Matrix& second_rotation,
                                    const ModelParams& params,
                                    const GateTiming& timing = {});

// Nitrogen-selective electron pulse: pi on the m_I = -1 manifold, 2 pi
// (bookkept as the identity) on m_I = 0. With probability cnot_error_* the
// intended action on that manifold fails and the electron is dephased.
// Residual pulse phases phase_kappa / phase_lambda act on the m_I = 0
// manifold's |e=0> / |e=1> amplitudes.
DensityState noisy_cnot(const DensityState& rho, const ModelParams& params);

// ---------------------------------------------------------------------------
// Single-shot readout.

// Forward confusion model on one electron slot: declare 0 with probability f0
// for true m_s = 0 and 1 with probability f1 for true m_s = -1. Conditional
// states are the true-projection mixtures consistent with the declaration.
std::array<MeasurementResult, 2> electron_ssro(const DensityState& rho,
                                               Slot slot, double f0, double f1);
MeasurementResult electron_ssro_sample(const DensityState& rho, Slot slot,
                                       double f0, double f1, RandomStream& rng);

// Nuclear readout chain: `rounds` repetitions of (electron reset, CNOT,
// electron readout); the nitrogen is declared m_I = 0 (outcome 0) when at
// least one round declares the photon-click outcome. Uses Alice's readout
// fidelities. Composite fidelity emerges from the components.
std::array<MeasurementResult, 2> nuclear_ssro(const DensityState& rho,
                                              const ModelParams& params,
                                              int rounds = 2);
MeasurementResult nuclear_ssro_sample(const DensityState& rho,
                                      const ModelParams& params,
                                      RandomStream& rng, int rounds = 2);

// ---------------------------------------------------------------------------
// Nuclear depolarization rate equations.

// One electron-spin-flip step of the population rate equations.
NuclearPopulations depolarization_step(const NuclearPopulations& p,
                                       double p_flip);

// p_minus1(n) = (2 + (1-3p)^n + 3(1-p)^n) / 6, the closed-form solution for
// a spin starting in m_I = -1.
double closed_form_p_minus1(double n, double p_flip);

// Evolve init_populations over n = 0 .. M/2 flip steps (M attempts cause M/2
// electron flips) and return the uniform average.
NuclearPopulations averaged_populations(const ModelParams& params);

}  // namespace nvtel
