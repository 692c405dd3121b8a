#pragma once

#include "nvtel/link.hpp"
#include "nvtel/model.hpp"
#include "nvtel/quantum.hpp"
#include "nvtel/rng.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nvtel {

// ---------------------------------------------------------------------------
// Source states.

enum class StateLabel { plus_z, minus_z, plus_x, minus_x, plus_y, minus_y };
inline constexpr std::array<StateLabel, 6> kSixStates = {
    StateLabel::plus_z, StateLabel::minus_z, StateLabel::plus_x,
    StateLabel::minus_x, StateLabel::plus_y, StateLabel::minus_y};
std::string label_name(StateLabel l);
std::optional<StateLabel> parse_label(std::string_view name);

struct SourceState {
  Complex alpha;
  Complex beta;
  std::optional<StateLabel> label;

  // |alpha|^2 + |beta|^2 must be 1 within 1e-12
  static SourceState from_amplitudes(Complex alpha, Complex beta);
  static SourceState canonical(StateLabel l);
  // RF rotation with R|1> ∝ alpha|0> + beta|1>; canonical labels use the
  // named pi/2 and pi pulses, arbitrary states the generic unitary completion
  Matrix preparation_rotation() const;
  PureState ket(Slot slot) const;
};

// ---------------------------------------------------------------------------
// BSM outcome and feed-forward.

struct BsmOutcome {
  int n_bit = 0;  // nitrogen readout, first character of "ij"
  int e_bit = 0;  // electron readout

  int index() const { return n_bit * 2 + e_bit; }
  static BsmOutcome from_index(int idx);
  std::string str() const;
  bool operator==(const BsmOutcome&) const = default;
};

enum class FfOp { identity, Y, x, xbar, y, ybar };
std::string ff_op_name(FfOp op);

struct FeedForwardOp {
  BsmOutcome outcome;
  StateLabel input_label = StateLabel::plus_z;
  FfOp operation = FfOp::identity;
  int ideal_bit = 0;  // 0 -> |0>, 1 -> |1>

  Matrix matrix() const;
  // true for the entries whose readout result is inverted when
  // reconstructing the fixed-rotation (no feed-forward) analysis
  bool inverted_without_feedforward() const;
};

// The (input label x outcome) feed-forward table, cell for cell.
FeedForwardOp feed_forward(const BsmOutcome& outcome, StateLabel input);

// ---------------------------------------------------------------------------
// Protocol steps. States carry slots (nitrogen_A, electron_A[, electron_B]).

// Decoherence-protected source encoding: rotate the nitrogen from |1> into
// alpha|0> + beta|1> around the electron echo.
DensityState prepare_source(const DensityState& post_herald,
                            const SourceState& source,
                            const ModelParams& params,
                            const GateTiming& timing = {});

// Calibration knobs of the Bell-state mapping: the RF drive phase of the
// first nitrogen pulse and the evolution time between the CNOT and the echo.
struct BsmTuning {
  double axis_phase = 0.0;
  GateTiming timing = {};
};

// CNOT followed by the protected nitrogen pi/2 about +Y: maps the Bell basis
// of (nitrogen_A, electron_A) onto the computational basis.
DensityState bell_state_map(const DensityState& rho, const ModelParams& params,
                            const BsmTuning& tuning = {});

enum class DecouplingChannel { depolarizing, dephasing };

// Bob's bookkept X-Y-X decoupling rotation plus the channel realizing the
// XY4 preservation fidelity f_dd (keep probability 2 f_dd - 1 for the
// depolarizing choice, phase-flip probability 3(1-f_dd)/2 for dephasing).
DensityState apply_decoupling(const DensityState& rho, const ModelParams& params,
                              DecouplingChannel channel =
                                  DecouplingChannel::depolarizing);

// Readout stage of the BSM: electron SSRO, then the two-round nuclear chain.
// Analytic form returns all four outcome branches; Bob's conditional state is
// attached when the state carries his slot.
struct BsmBranch {
  BsmOutcome outcome;
  double probability = 0.0;
  std::optional<DensityState> bob;
};
std::vector<BsmBranch> bsm(const DensityState& rho, const ModelParams& params);
BsmBranch bsm_sample(const DensityState& rho, const ModelParams& params,
                     RandomStream& rng);

// Outcome each Bell state maps to, derived by running the ideal circuit
// (errors and residual phases stripped from `params`). Throws if any Bell
// state fails to map deterministically.
std::array<BsmOutcome, 4> derive_bell_correspondence(const ModelParams& params);

// ---------------------------------------------------------------------------
// Full protocol runs.

struct TeleportOptions {
  bool corrected_initialization = false;  // score with p_minus1 forced to 1
  DecouplingChannel channel = DecouplingChannel::depolarizing;
  bool operator==(const TeleportOptions&) const = default;
};

struct TeleportRecord {
  StateLabel input_label = StateLabel::plus_z;
  BsmOutcome outcome;
  int bob_declared_bit = 0;
  bool success_bit = false;  // declared bit equals the table's ideal result
  HeraldEvent herald;
  int nuclear_branch = -1;  // -1, 0, +1 (m_I at the end of initialization)
  std::uint64_t seed = 0;
};

// Exact per-outcome decomposition of one teleportation, averaged over the
// nuclear initialization branches.
struct TeleportOutcomeStat {
  BsmOutcome outcome;
  double probability = 0.0;      // P(outcome)
  double state_fidelity = 0.0;   // <ideal|U rho_B U†|ideal> given the outcome
  double declared_success = 0.0; // P(Bob declares the ideal bit | outcome)
  bool inverted_no_ff = false;
};

struct TeleportAnalysis {
  std::array<TeleportOutcomeStat, 4> outcomes;
  double fidelity = 0.0;          // sum_o P(o) * state_fidelity(o)
  double declared_success = 0.0;  // sum_o P(o) * declared_success(o)
  double no_feedforward = 0.0;    // fixed-rotation readout reconstruction
  // weights used for the -1 / 0 / +1 branches
  double w_minus1 = 0.0, w_0 = 0.0, w_plus1 = 0.0;
};

TeleportAnalysis teleport_analytic(const ModelParams& params,
                                   const SourceState& source,
                                   const TeleportOptions& options = {});

// Per-(branch, outcome) detail used by the ensemble runner and tomography:
// Bob's conditional state before feed-forward.
struct TeleportBranchOutcome {
  int nuclear_branch = -1;
  double weight = 0.0;       // branch weight
  BsmOutcome outcome;
  double probability = 0.0;  // P(outcome | branch)
  DensityState bob;          // single-qubit, slot electron_b
};
std::vector<TeleportBranchOutcome> teleport_branch_outcomes(
    const ModelParams& params, const SourceState& source,
    const TeleportOptions& options = {});

// One full Monte Carlo run of the protocol built from the component-level
// sampling operations. Costly per shot; ensembles use CompiledTeleport.
TeleportRecord teleport_once(const ModelParams& params,
                             const SourceState& source, RandomStream& rng,
                             const TeleportOptions& options = {});

// Precomputed exact joint distribution of (branch, outcome, declared bit)
// for fast ensemble sampling. Sampling from it is distribution-identical to
// teleport_once.
class CompiledTeleport {
 public:
  CompiledTeleport(const ModelParams& params, const SourceState& source,
                   const TeleportOptions& options = {});

  TeleportRecord sample(const ModelParams& params, RandomStream& rng) const;
  const TeleportAnalysis& analysis() const { return analysis_; }
  StateLabel label() const { return label_; }

 private:
  struct Cell {
    double probability;  // joint P(branch, outcome)
    int nuclear_branch;
    BsmOutcome outcome;
    double p_declare_ideal;
  };
  std::vector<Cell> cells_;
  TeleportAnalysis analysis_;
  StateLabel label_ = StateLabel::plus_z;
  int ideal_bit_ = 0;
};

}  // namespace nvtel
