#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <initializer_list>
#include <string>
#include <vector>

namespace nvtel {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Tolerances: exact-math identities vs. eigenvalue positivity slack.
inline constexpr double kExactTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

// Tensor slots, fixed protocol order |nitrogen_A, electron_A, electron_B>.
// The first slot in a state's slot list is the most significant bit.
enum class Slot : int { nitrogen_a = 0, electron_a = 1, electron_b = 2 };

std::string slot_name(Slot s);

// ---------------------------------------------------------------------------
// Domain types

struct PureState {
  Vector amplitudes;
  std::vector<Slot> slots;

  int dim() const { return static_cast<int>(amplitudes.size()); }
  int num_qubits() const { return static_cast<int>(slots.size()); }
  double norm() const { return amplitudes.norm(); }
  // squared norm must be 1 within kExactTol
  bool is_normalized(double tol = kExactTol) const;
};

struct DensityState {
  Matrix matrix;
  std::vector<Slot> slots;

  int dim() const { return static_cast<int>(matrix.rows()); }
  int num_qubits() const { return static_cast<int>(slots.size()); }
  bool has_slot(Slot s) const;
  int slot_position(Slot s) const;  // throws if absent

  double trace_real() const { return matrix.trace().real(); }
  double purity() const;  // Tr(rho^2)
  double min_eigenvalue() const;
  // Hermitian within tol, trace 1 within tol, eigenvalues >= -psd_tol
  bool is_valid(double tol = kExactTol, double psd_tol = kPsdTol) const;
  void assert_valid(double tol = kExactTol, double psd_tol = kPsdTol) const;
};

struct UnitaryOp {
  Matrix matrix;
  std::vector<Slot> target_slots;

  UnitaryOp() = default;
  // checks U†U = 1 within kExactTol
  UnitaryOp(Matrix m, std::vector<Slot> targets);
  // bind an unbound single-qubit operator to a slot
  UnitaryOp on(Slot s) const;
  int dim() const { return static_cast<int>(matrix.rows()); }
};

struct MeasurementResult {
  int outcome = 0;
  double probability = 0.0;
  DensityState conditional_state;
  // false for zero-probability branches; the conditional state is then
  // unnormalizable and must not be used
  bool valid = false;
};

// ---------------------------------------------------------------------------
// Construction helpers

PureState make_pure(std::vector<Complex> amplitudes, std::vector<Slot> slots);
PureState basis_ket(int index, std::vector<Slot> slots);
DensityState pure_density(const PureState& psi);
DensityState maximally_mixed(std::vector<Slot> slots);

enum class BellState { phi_plus, phi_minus, psi_plus, psi_minus };
inline constexpr std::array<BellState, 4> kBellStates = {
    BellState::phi_plus, BellState::phi_minus, BellState::psi_plus,
    BellState::psi_minus};
std::string bell_name(BellState b);
// (|00> ± |11>)/sqrt2 and (|01> ± |10>)/sqrt2 over two slots
PureState bell_ket(BellState b, std::vector<Slot> slots);

// ---------------------------------------------------------------------------
// Rotations. Convention: rotation(axis, theta) = exp(-i * theta * sigma/2),
// negative sense flips the sign of the angle. Named pi/2 forms x, y and their
// negative-sense partners xbar, ybar; capital X, Y, Z are pi rotations.

enum class Axis { X, Y, Z };
enum class Sense { positive, negative };

UnitaryOp rotation(Axis axis, double angle, Sense sense = Sense::positive);

namespace gates {
Matrix identity2();
Matrix sigma_x();
Matrix sigma_y();
Matrix sigma_z();
Matrix x();     // pi/2 about +X
Matrix xbar();  // pi/2 about +X, negative sense
Matrix y();     // pi/2 about +Y
Matrix ybar();
Matrix z();
Matrix zbar();
Matrix X();  // pi about +X
Matrix Y();
Matrix Z();
}  // namespace gates

// ---------------------------------------------------------------------------
// Operations. All pure functions; density-matrix outputs preserve trace,
// Hermiticity and positivity within the stated tolerances.

// Kronecker composition; slot order is (a's slots, then b's). Throws if the
// combined dimension exceeds 3 qubits or slots collide.
PureState tensor_product(const PureState& a, const PureState& b);
DensityState tensor_product(const DensityState& a, const DensityState& b);
UnitaryOp tensor_product(const UnitaryOp& a, const UnitaryOp& b);

// rho' = U rho U† with U embedded on its target slots.
DensityState apply_unitary(const DensityState& rho, const UnitaryOp& u);

// Z-basis projective measurement of one slot; outcomes 0 and 1 with Born-rule
// probabilities and renormalized conditional states.
std::array<MeasurementResult, 2> projective_measure(const DensityState& rho,
                                                    Slot slot);

// Zero all coherences between the slot's |0> and |1> sectors.
DensityState dephase(const DensityState& rho, Slot slot);

// rho' = keep_prob * rho + (1-keep_prob) * (I/2 on slot ⊗ Tr_slot rho)
DensityState depolarize(const DensityState& rho, Slot slot, double keep_prob);

// <psi| rho |psi>; requires identical slot layout.
double fidelity_to_pure(const DensityState& rho, const PureState& psi);

// Trace over the complement of keep_slots; result keeps rho's slot order.
DensityState partial_trace(const DensityState& rho,
                           const std::vector<Slot>& keep_slots);

// Replace one slot by |0><0| (trace it out, re-tensor in place).
DensityState reset_slot(const DensityState& rho, Slot slot);

// <sigma_axis> of a single-qubit state.
double pauli_expectation(const DensityState& rho, Axis axis);

// Embed a unitary acting on target slots into the full space of `slots`.
Matrix embed_unitary(const Matrix& u, const std::vector<Slot>& targets,
                     const std::vector<Slot>& slots);

}  // namespace nvtel
