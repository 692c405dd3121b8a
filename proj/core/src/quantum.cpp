#include "nvtel/quantum.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nvtel {

namespace {

using namespace std::complex_literals;

int checked_log2(int dim) {
  int n = 0;
  while ((1 << n) < dim) ++n;
  if ((1 << n) != dim) throw std::invalid_argument("dimension is not a power of 2");
  return n;
}

void check_slots_unique(const std::vector<Slot>& slots) {
  for (std::size_t i = 0; i < slots.size(); ++i)
    for (std::size_t j = i + 1; j < slots.size(); ++j)
      if (slots[i] == slots[j])
        throw std::invalid_argument("duplicate tensor slot " + slot_name(slots[i]));
}

// bit of slot at position p (0 = most significant) inside an n-qubit index
inline int bit_at(int index, int position, int n) {
  return (index >> (n - 1 - position)) & 1;
}

}  // namespace

std::string slot_name(Slot s) {
  switch (s) {
    case Slot::nitrogen_a: return "nitrogen_a";
    case Slot::electron_a: return "electron_a";
    case Slot::electron_b: return "electron_b";
  }
  return "?";
}

bool PureState::is_normalized(double tol) const {
  return std::abs(amplitudes.squaredNorm() - 1.0) <= tol;
}

bool DensityState::has_slot(Slot s) const {
  return std::find(slots.begin(), slots.end(), s) != slots.end();
}

int DensityState::slot_position(Slot s) const {
  auto it = std::find(slots.begin(), slots.end(), s);
  if (it == slots.end())
    throw std::invalid_argument("state has no slot " + slot_name(s));
  return static_cast<int>(it - slots.begin());
}

double DensityState::purity() const { return (matrix * matrix).trace().real(); }

double DensityState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix);
  return es.eigenvalues().minCoeff();
}

bool DensityState::is_valid(double tol, double psd_tol) const {
  if (matrix.rows() != matrix.cols()) return false;
  if (matrix.rows() != (1 << num_qubits())) return false;
  if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(matrix.trace() - Complex(1.0, 0.0)) > tol) return false;
  return min_eigenvalue() >= -psd_tol;
}

void DensityState::assert_valid(double tol, double psd_tol) const {
  if (!is_valid(tol, psd_tol))
    throw std::runtime_error("density state violates its invariants");
}

UnitaryOp::UnitaryOp(Matrix m, std::vector<Slot> targets)
    : matrix(std::move(m)), target_slots(std::move(targets)) {
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("unitary must be square");
  if (!target_slots.empty()) {
    check_slots_unique(target_slots);
    if (matrix.rows() != (1 << target_slots.size()))
      throw std::invalid_argument("unitary dimension does not match its slots");
  }
  Matrix gram = matrix.adjoint() * matrix;
  gram -= Matrix::Identity(matrix.rows(), matrix.cols());
  if (gram.cwiseAbs().maxCoeff() > kExactTol)
    throw std::invalid_argument("matrix is not unitary within 1e-12");
}

UnitaryOp UnitaryOp::on(Slot s) const {
  if (dim() != 2)
    throw std::invalid_argument("only single-qubit operators can be rebound");
  return UnitaryOp(matrix, {s});
}

PureState make_pure(std::vector<Complex> amplitudes, std::vector<Slot> slots) {
  check_slots_unique(slots);
  if (slots.size() > 3) throw std::invalid_argument("more than 3 qubits");
  if (amplitudes.size() != (1u << slots.size()))
    throw std::invalid_argument("amplitude count does not match slot count");
  PureState psi;
  psi.amplitudes = Eigen::Map<Vector>(amplitudes.data(), amplitudes.size());
  psi.slots = std::move(slots);
  if (!psi.is_normalized())
    throw std::invalid_argument("pure state is not normalized within 1e-12");
  return psi;
}

PureState basis_ket(int index, std::vector<Slot> slots) {
  std::vector<Complex> amps(1u << slots.size(), 0.0);
  if (index < 0 || index >= static_cast<int>(amps.size()))
    throw std::invalid_argument("basis index out of range");
  amps[index] = 1.0;
  return make_pure(std::move(amps), std::move(slots));
}

DensityState pure_density(const PureState& psi) {
  DensityState rho;
  rho.matrix = psi.amplitudes * psi.amplitudes.adjoint();
  rho.slots = psi.slots;
  return rho;
}

DensityState maximally_mixed(std::vector<Slot> slots) {
  check_slots_unique(slots);
  int dim = 1 << slots.size();
  DensityState rho;
  rho.matrix = Matrix::Identity(dim, dim) / static_cast<double>(dim);
  rho.slots = std::move(slots);
  return rho;
}

std::string bell_name(BellState b) {
  switch (b) {
    case BellState::phi_plus: return "phi_plus";
    case BellState::phi_minus: return "phi_minus";
    case BellState::psi_plus: return "psi_plus";
    case BellState::psi_minus: return "psi_minus";
  }
  return "?";
}

PureState bell_ket(BellState b, std::vector<Slot> slots) {
  if (slots.size() != 2) throw std::invalid_argument("bell state needs 2 slots");
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<Complex> amps(4, 0.0);
  switch (b) {
    case BellState::phi_plus:  amps[0] = s; amps[3] = s; break;
    case BellState::phi_minus: amps[0] = s; amps[3] = -s; break;
    case BellState::psi_plus:  amps[1] = s; amps[2] = s; break;
    case BellState::psi_minus: amps[1] = s; amps[2] = -s; break;
  }
  return make_pure(std::move(amps), std::move(slots));
}

UnitaryOp rotation(Axis axis, double angle, Sense sense) {
  const double theta = (sense == Sense::negative) ? -angle : angle;
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  Matrix sigma;
  switch (axis) {
    case Axis::X: sigma = gates::sigma_x(); break;
    case Axis::Y: sigma = gates::sigma_y(); break;
    case Axis::Z: sigma = gates::sigma_z(); break;
  }
  Matrix u = c * gates::identity2() - Complex(0.0, s) * sigma;
  UnitaryOp op;
  op.matrix = std::move(u);
  return op;
}

namespace gates {
Matrix identity2() { return Matrix::Identity(2, 2); }
Matrix sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Matrix sigma_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}
Matrix sigma_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
Matrix x() { return rotation(Axis::X, kPi / 2).matrix; }
Matrix xbar() { return rotation(Axis::X, kPi / 2, Sense::negative).matrix; }
Matrix y() { return rotation(Axis::Y, kPi / 2).matrix; }
Matrix ybar() { return rotation(Axis::Y, kPi / 2, Sense::negative).matrix; }
Matrix z() { return rotation(Axis::Z, kPi / 2).matrix; }
Matrix zbar() { return rotation(Axis::Z, kPi / 2, Sense::negative).matrix; }
Matrix X() { return rotation(Axis::X, kPi).matrix; }
Matrix Y() { return rotation(Axis::Y, kPi).matrix; }
Matrix Z() { return rotation(Axis::Z, kPi).matrix; }
}  // namespace gates

namespace {

template <typename T>
std::vector<Slot> combined_slots(const T& a, const T& b) {
  std::vector<Slot> slots = a;
  slots.insert(slots.end(), b.begin(), b.end());
  check_slots_unique(slots);
  if (slots.size() > 3)
    throw std::invalid_argument("tensor product exceeds 3 qubits");
  return slots;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

PureState tensor_product(const PureState& a, const PureState& b) {
  PureState out;
  out.slots = combined_slots(a.slots, b.slots);
  out.amplitudes = Vector(a.dim() * b.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < b.dim(); ++j)
      out.amplitudes(i * b.dim() + j) = a.amplitudes(i) * b.amplitudes(j);
  return out;
}

DensityState tensor_product(const DensityState& a, const DensityState& b) {
  DensityState out;
  out.slots = combined_slots(a.slots, b.slots);
  out.matrix = kron(a.matrix, b.matrix);
  return out;
}

UnitaryOp tensor_product(const UnitaryOp& a, const UnitaryOp& b) {
  return UnitaryOp(kron(a.matrix, b.matrix),
                   combined_slots(a.target_slots, b.target_slots));
}

Matrix embed_unitary(const Matrix& u, const std::vector<Slot>& targets,
                     const std::vector<Slot>& slots) {
  const int n = static_cast<int>(slots.size());
  const int k = static_cast<int>(targets.size());
  if (u.rows() != (1 << k))
    throw std::invalid_argument("unitary dimension does not match its slots");
  std::vector<int> positions(k);
  for (int t = 0; t < k; ++t) {
    auto it = std::find(slots.begin(), slots.end(), targets[t]);
    if (it == slots.end())
      throw std::invalid_argument("state has no slot " + slot_name(targets[t]));
    positions[t] = static_cast<int>(it - slots.begin());
  }
  const int dim = 1 << n;
  int rest_mask = dim - 1;
  for (int p : positions) rest_mask &= ~(1 << (n - 1 - p));

  Matrix full = Matrix::Zero(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      if ((r & rest_mask) != (c & rest_mask)) continue;
      int ur = 0, uc = 0;
      for (int t = 0; t < k; ++t) {
        ur = (ur << 1) | bit_at(r, positions[t], n);
        uc = (uc << 1) | bit_at(c, positions[t], n);
      }
      full(r, c) = u(ur, uc);
    }
  }
  return full;
}

DensityState apply_unitary(const DensityState& rho, const UnitaryOp& u) {
  if (u.target_slots.empty())
    throw std::invalid_argument("unitary is not bound to any slot");
  Matrix full = embed_unitary(u.matrix, u.target_slots, rho.slots);
  DensityState out;
  out.slots = rho.slots;
  out.matrix = full * rho.matrix * full.adjoint();
  return out;
}

std::array<MeasurementResult, 2> projective_measure(const DensityState& rho,
                                                    Slot slot) {
  const int n = rho.num_qubits();
  const int p = rho.slot_position(slot);
  const int dim = rho.dim();
  std::array<MeasurementResult, 2> results;
  for (int outcome = 0; outcome < 2; ++outcome) {
    Matrix proj = Matrix::Zero(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c)
        if (bit_at(r, p, n) == outcome && bit_at(c, p, n) == outcome)
          proj(r, c) = rho.matrix(r, c);
    double prob = proj.trace().real();
    MeasurementResult& res = results[outcome];
    res.outcome = outcome;
    res.probability = prob;
    res.conditional_state.slots = rho.slots;
    if (prob > 1e-15) {
      res.conditional_state.matrix = proj / prob;
      res.valid = true;
    } else {
      res.conditional_state.matrix = Matrix::Zero(dim, dim);
      res.valid = false;
    }
  }
  return results;
}

DensityState dephase(const DensityState& rho, Slot slot) {
  const int n = rho.num_qubits();
  const int p = rho.slot_position(slot);
  DensityState out = rho;
  for (int r = 0; r < rho.dim(); ++r)
    for (int c = 0; c < rho.dim(); ++c)
      if (bit_at(r, p, n) != bit_at(c, p, n)) out.matrix(r, c) = 0.0;
  return out;
}

DensityState depolarize(const DensityState& rho, Slot slot, double keep_prob) {
  if (keep_prob < 0.0 || keep_prob > 1.0)
    throw std::invalid_argument("keep_prob must lie in [0,1]");
  const int n = rho.num_qubits();
  const int p = rho.slot_position(slot);
  const int dim = rho.dim();
  const int bit = 1 << (n - 1 - p);
  // I/2 on the slot tensored with the partial trace over it
  Matrix mixed = Matrix::Zero(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      if (bit_at(r, p, n) != bit_at(c, p, n)) continue;
      int r0 = r & ~bit, c0 = c & ~bit;
      mixed(r, c) = 0.5 * (rho.matrix(r0, c0) + rho.matrix(r0 | bit, c0 | bit));
    }
  }
  DensityState out;
  out.slots = rho.slots;
  out.matrix = keep_prob * rho.matrix + (1.0 - keep_prob) * mixed;
  return out;
}

double fidelity_to_pure(const DensityState& rho, const PureState& psi) {
  if (rho.slots != psi.slots)
    throw std::invalid_argument("fidelity requires matching slot layout");
  Complex val = (psi.amplitudes.adjoint() * rho.matrix * psi.amplitudes)(0, 0);
  return val.real();
}

DensityState partial_trace(const DensityState& rho,
                           const std::vector<Slot>& keep_slots) {
  if (keep_slots.empty())
    throw std::invalid_argument("partial trace must keep at least one slot");
  const int n = rho.num_qubits();
  std::vector<int> keep_pos;
  for (int p = 0; p < n; ++p)
    if (std::find(keep_slots.begin(), keep_slots.end(), rho.slots[p]) !=
        keep_slots.end())
      keep_pos.push_back(p);
  if (keep_pos.size() != keep_slots.size())
    throw std::invalid_argument("keep set contains a slot the state lacks");

  std::vector<int> traced_pos;
  for (int p = 0; p < n; ++p)
    if (std::find(keep_pos.begin(), keep_pos.end(), p) == keep_pos.end())
      traced_pos.push_back(p);

  const int kn = static_cast<int>(keep_pos.size());
  const int tn = static_cast<int>(traced_pos.size());
  DensityState out;
  for (int p : keep_pos) out.slots.push_back(rho.slots[p]);
  out.matrix = Matrix::Zero(1 << kn, 1 << kn);
  for (int r = 0; r < (1 << kn); ++r) {
    for (int c = 0; c < (1 << kn); ++c) {
      Complex sum = 0.0;
      for (int t = 0; t < (1 << tn); ++t) {
        int fr = 0, fc = 0;
        for (int q = 0; q < kn; ++q) {
          int bit = 1 << (n - 1 - keep_pos[q]);
          if (bit_at(r, q, kn)) fr |= bit;
          if (bit_at(c, q, kn)) fc |= bit;
        }
        for (int q = 0; q < tn; ++q) {
          if (bit_at(t, q, tn)) {
            int bit = 1 << (n - 1 - traced_pos[q]);
            fr |= bit;
            fc |= bit;
          }
        }
        sum += rho.matrix(fr, fc);
      }
      out.matrix(r, c) = sum;
    }
  }
  return out;
}

DensityState reset_slot(const DensityState& rho, Slot slot) {
  const int n = rho.num_qubits();
  const int p = rho.slot_position(slot);
  const int dim = rho.dim();
  const int bit = 1 << (n - 1 - p);
  DensityState out;
  out.slots = rho.slots;
  out.matrix = Matrix::Zero(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      if ((r & bit) || (c & bit)) continue;
      out.matrix(r, c) = rho.matrix(r, c) + rho.matrix(r | bit, c | bit);
    }
  }
  return out;
}

double pauli_expectation(const DensityState& rho, Axis axis) {
  if (rho.dim() != 2)
    throw std::invalid_argument("pauli_expectation expects a single qubit");
  Matrix sigma;
  switch (axis) {
    case Axis::X: sigma = gates::sigma_x(); break;
    case Axis::Y: sigma = gates::sigma_y(); break;
    case Axis::Z: sigma = gates::sigma_z(); break;
  }
  return (sigma * rho.matrix).trace().real();
}

}  // namespace nvtel
