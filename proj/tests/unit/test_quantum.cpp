#include "nvtel/quantum.hpp"

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace nvtel;

namespace {

const std::vector<Slot> kOne = {Slot::electron_a};
const std::vector<Slot> kPair = {Slot::electron_a, Slot::electron_b};

DensityState random_state(std::mt19937_64& rng, std::vector<Slot> slots) {
  return DensityState{oracles::random_density(rng, 1 << slots.size()),
                      std::move(slots)};
}

}  // namespace

TEST_CASE("tensor product composes identities and basis kets") {
  UnitaryOp i2(gates::identity2(), {Slot::electron_a});
  UnitaryOp i2b(gates::identity2(), {Slot::electron_b});
  UnitaryOp i4 = tensor_product(i2, i2b);
  CHECK((i4.matrix - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);

  PureState zero = basis_ket(0, {Slot::electron_a});
  PureState one = basis_ket(1, {Slot::electron_b});
  PureState combined = tensor_product(zero, one);
  REQUIRE(combined.dim() == 4);
  CHECK(std::abs(combined.amplitudes(1) - Complex(1.0)) < kExactTol);
  for (int i : {0, 2, 3}) CHECK(std::abs(combined.amplitudes(i)) < kExactTol);
}

TEST_CASE("tensor product of sigma_z and sigma_x matches brute-force expansion") {
  UnitaryOp sz(gates::sigma_z(), {Slot::electron_a});
  UnitaryOp sx(gates::sigma_x(), {Slot::electron_b});
  Matrix got = tensor_product(sz, sx).matrix;
  Matrix expected = oracles::kron(gates::sigma_z(), gates::sigma_x());
  CHECK((got - expected).cwiseAbs().maxCoeff() < kExactTol);
}

TEST_CASE("tensor product rejects slot collisions and dimension overflow") {
  PureState a = basis_ket(0, {Slot::electron_a});
  CHECK_THROWS_AS(tensor_product(a, a), std::invalid_argument);
  PureState two = basis_ket(0, {Slot::nitrogen_a, Slot::electron_a});
  PureState other = basis_ket(0, {Slot::electron_b});
  PureState three = tensor_product(two, other);
  CHECK(three.num_qubits() == 3);
  CHECK_THROWS_AS(tensor_product(three, a), std::invalid_argument);
}

TEST_CASE("apply_unitary identity and bit flip") {
  std::mt19937_64 rng(11);
  DensityState rho = random_state(rng, kPair);
  DensityState same =
      apply_unitary(rho, UnitaryOp(gates::identity2(), {Slot::electron_b}));
  CHECK((same.matrix - rho.matrix).cwiseAbs().maxCoeff() < kExactTol);

  DensityState zero = pure_density(basis_ket(0, kOne));
  DensityState flipped =
      apply_unitary(zero, UnitaryOp(gates::sigma_x(), kOne));
  CHECK(std::abs(flipped.matrix(1, 1).real() - 1.0) < kExactTol);
}

TEST_CASE("y rotation prepares |x> from |0>") {
  DensityState zero = pure_density(basis_ket(0, kOne));
  DensityState rotated = apply_unitary(zero, UnitaryOp(gates::y(), kOne));
  CHECK(pauli_expectation(rotated, Axis::X) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("apply_unitary preserves purity and validity") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    DensityState rho = random_state(rng, kPair);
    UnitaryOp u(oracles::random_unitary(rng, 2), {Slot::electron_b});
    DensityState out = apply_unitary(rho, u);
    CHECK(std::abs(out.purity() - rho.purity()) < 1e-12);
    CHECK(out.is_valid());
  }
}

TEST_CASE("rotation conventions") {
  CHECK((rotation(Axis::X, 0.0).matrix - gates::identity2()).cwiseAbs().maxCoeff() <
        kExactTol);

  // xbar|0> = |y> = (|0> + i|1>)/sqrt2
  Vector v = gates::xbar() * basis_ket(0, kOne).amplitudes;
  PureState y_state = make_pure({1.0 / std::sqrt(2.0), Complex(0.0, 1.0 / std::sqrt(2.0))}, kOne);
  CHECK(std::abs(std::abs(y_state.amplitudes.dot(v)) - 1.0) < 1e-12);

  // Y|1> lands on |0> up to global phase
  Vector w = gates::Y() * basis_ket(1, kOne).amplitudes;
  CHECK(std::abs(std::abs(w(0)) - 1.0) < 1e-12);
  CHECK(std::abs(w(1)) < 1e-12);

  // negative sense flips the angle
  Matrix round_trip = rotation(Axis::Y, 0.7).matrix *
                      rotation(Axis::Y, 0.7, Sense::negative).matrix;
  CHECK((round_trip - gates::identity2()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("unitary invariant is enforced") {
  Matrix bad(2, 2);
  bad << 1, 0, 0, 2;
  CHECK_THROWS_AS(UnitaryOp(bad, {Slot::electron_a}), std::invalid_argument);
}

TEST_CASE("projective measurement on eigenstates and superpositions") {
  DensityState zero = pure_density(basis_ket(0, kOne));
  auto res = projective_measure(zero, Slot::electron_a);
  CHECK(res[0].probability == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res[0].valid);
  CHECK_FALSE(res[1].valid);
  CHECK(res[1].probability == doctest::Approx(0.0).epsilon(1e-12));

  DensityState x_state =
      apply_unitary(zero, UnitaryOp(gates::y(), kOne));
  auto res_x = projective_measure(x_state, Slot::electron_a);
  CHECK(res_x[0].probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(res_x[1].probability == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("measuring one half of psi- projects the partner") {
  DensityState psi_minus = pure_density(bell_ket(BellState::psi_minus, kPair));
  auto res = projective_measure(psi_minus, Slot::electron_a);
  CHECK(res[0].probability == doctest::Approx(0.5).epsilon(1e-12));
  DensityState partner =
      partial_trace(res[0].conditional_state, {Slot::electron_b});
  CHECK(std::abs(partner.matrix(1, 1).real() - 1.0) < 1e-12);
}

TEST_CASE("measurement probabilities sum to one on random states") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    DensityState rho = random_state(
        rng, {Slot::nitrogen_a, Slot::electron_a, Slot::electron_b});
    auto res = projective_measure(rho, Slot::electron_a);
    CHECK(res[0].probability + res[1].probability ==
          doctest::Approx(1.0).epsilon(1e-12));
    if (res[0].valid) CHECK(res[0].conditional_state.is_valid());
  }
}

TEST_CASE("dephase kills coherence and is idempotent") {
  DensityState x_state = apply_unitary(pure_density(basis_ket(0, kOne)),
                                       UnitaryOp(gates::y(), kOne));
  DensityState dephased = dephase(x_state, Slot::electron_a);
  CHECK((dephased.matrix - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-12);

  DensityState psi_minus = pure_density(bell_ket(BellState::psi_minus, kPair));
  DensityState mixed = dephase(psi_minus, Slot::electron_a);
  Matrix expected = Matrix::Zero(4, 4);
  expected(1, 1) = 0.5;
  expected(2, 2) = 0.5;
  CHECK((mixed.matrix - expected).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(14);
  DensityState rho = random_state(rng, kPair);
  DensityState once = dephase(rho, Slot::electron_b);
  DensityState twice = dephase(once, Slot::electron_b);
  CHECK((once.matrix - twice.matrix).cwiseAbs().maxCoeff() < 1e-15);

  // diagonal states are untouched
  DensityState diag = dephase(dephase(rho, Slot::electron_a), Slot::electron_b);
  DensityState again = dephase(diag, Slot::electron_a);
  CHECK((diag.matrix - again.matrix).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("depolarize endpoints and closed form") {
  std::mt19937_64 rng(15);
  DensityState rho = random_state(rng, kPair);
  DensityState kept = depolarize(rho, Slot::electron_a, 1.0);
  CHECK((kept.matrix - rho.matrix).cwiseAbs().maxCoeff() < 1e-15);

  DensityState zero = pure_density(basis_ket(0, kOne));
  DensityState fully = depolarize(zero, Slot::electron_a, 0.0);
  CHECK((fully.matrix - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-12);

  for (double keep : {0.1, 0.5, 0.92}) {
    DensityState out = depolarize(zero, Slot::electron_a, keep);
    CHECK(fidelity_to_pure(out, basis_ket(0, kOne)) ==
          doctest::Approx((1.0 + keep) / 2.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(depolarize(zero, Slot::electron_a, 1.5), std::invalid_argument);
}

TEST_CASE("fidelity to pure states") {
  std::mt19937_64 rng(16);
  Vector ket = oracles::random_ket(rng, 2);
  PureState psi{ket, kOne};
  CHECK(fidelity_to_pure(pure_density(psi), psi) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity_to_pure(maximally_mixed(kOne), psi) ==
        doctest::Approx(0.5).epsilon(1e-12));

  PureState pair = bell_ket(BellState::psi_minus, kPair);
  CHECK_THROWS_AS(fidelity_to_pure(maximally_mixed(kOne), pair),
                  std::invalid_argument);
}

TEST_CASE("partial trace recovers product factors and bell marginals") {
  std::mt19937_64 rng(17);
  DensityState a = random_state(rng, {Slot::electron_a});
  DensityState b = random_state(rng, {Slot::electron_b});
  DensityState joint = tensor_product(a, b);
  DensityState back = partial_trace(joint, {Slot::electron_a});
  CHECK((back.matrix - a.matrix).cwiseAbs().maxCoeff() < 1e-12);

  DensityState psi_minus = pure_density(bell_ket(BellState::psi_minus, kPair));
  for (Slot s : kPair) {
    DensityState marg = partial_trace(psi_minus, {s});
    CHECK((marg.matrix - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  CHECK_THROWS_AS(partial_trace(psi_minus, {}), std::invalid_argument);
}

TEST_CASE("partial trace of the pre-readout state matches index contraction") {
  // source (alpha, beta) = (1, 0)
  DensityState rho = pure_density(fixtures::pre_readout_ket(1.0, 0.0));
  DensityState kept =
      partial_trace(rho, {Slot::nitrogen_a, Slot::electron_a});
  Matrix expected = oracles::ptrace_contract(rho.matrix, 3, 0b110);
  CHECK((kept.matrix - expected).cwiseAbs().maxCoeff() < 1e-12);
  // the nitrogen factorizes as |x> against a phi+ electron pair
  DensityState nitrogen = partial_trace(rho, {Slot::nitrogen_a});
  CHECK(pauli_expectation(nitrogen, Axis::X) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tensor then trace round trip on random states") {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 25; ++trial) {
    DensityState a = random_state(rng, {Slot::nitrogen_a, Slot::electron_a});
    DensityState b = random_state(rng, {Slot::electron_b});
    DensityState joint = tensor_product(a, b);
    DensityState back =
        partial_trace(joint, {Slot::nitrogen_a, Slot::electron_a});
    CHECK((back.matrix - a.matrix).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(joint.is_valid());
  }
}

TEST_CASE("channel outputs stay valid density states") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 25; ++trial) {
    DensityState rho = random_state(
        rng, {Slot::nitrogen_a, Slot::electron_a, Slot::electron_b});
    CHECK(dephase(rho, Slot::nitrogen_a).is_valid());
    CHECK(depolarize(rho, Slot::electron_b, 0.3).is_valid());
    CHECK(reset_slot(rho, Slot::electron_a).is_valid());
    CHECK(partial_trace(rho, {Slot::electron_b}).is_valid());
  }
}

TEST_CASE("reset_slot forces |0><0| while keeping the rest") {
  DensityState psi_minus = pure_density(bell_ket(BellState::psi_minus, kPair));
  DensityState reset = reset_slot(psi_minus, Slot::electron_a);
  auto res = projective_measure(reset, Slot::electron_a);
  CHECK(res[0].probability == doctest::Approx(1.0).epsilon(1e-12));
  DensityState partner = partial_trace(reset, {Slot::electron_b});
  CHECK((partner.matrix - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-12);
}
