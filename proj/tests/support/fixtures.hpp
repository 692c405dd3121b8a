#pragma once

#include "nvtel/protocol.hpp"
#include "nvtel/quantum.hpp"

#include <array>

namespace fixtures {

using nvtel::Complex;
using nvtel::PureState;
using nvtel::Slot;

// Per-outcome target states of the calibrated Bell-state mapping:
// 00 -> (a, b), 01 -> (-b, a), 10 -> (a, -b), 11 -> (b, a).
inline std::array<std::array<Complex, 2>, 4> branch_states(Complex a, Complex b) {
  return {{{a, b}, {-b, a}, {a, -b}, {b, a}}};
}

// The full three-qubit pre-readout state with those branches, each outcome
// |n e> carrying its target on the third qubit with amplitude 1/2.
inline PureState pre_readout_ket(Complex a, Complex b) {
  auto branches = branch_states(a, b);
  std::vector<Complex> amps(8, 0.0);
  for (int outcome = 0; outcome < 4; ++outcome)
    for (int bob = 0; bob < 2; ++bob)
      amps[outcome * 2 + bob] = 0.5 * branches[outcome][bob];
  return nvtel::make_pure(
      amps, {Slot::nitrogen_a, Slot::electron_a, Slot::electron_b});
}

}  // namespace fixtures
