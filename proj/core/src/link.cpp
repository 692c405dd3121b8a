#include "nvtel/link.hpp"

#include <cmath>
#include <stdexcept>

namespace nvtel {

LinkState make_entangled_state(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw std::invalid_argument("visibility must lie in [0,1]");
  const std::vector<Slot> slots = {Slot::electron_a, Slot::electron_b};
  PureState psi_minus = bell_ket(BellState::psi_minus, slots);
  Matrix m = visibility * (psi_minus.amplitudes * psi_minus.amplitudes.adjoint());
  m(1, 1) += (1.0 - visibility) / 2.0;  // |01><01|
  m(2, 2) += (1.0 - visibility) / 2.0;  // |10><10|
  LinkState link;
  link.rho23 = DensityState{std::move(m), slots};
  link.visibility_used = visibility;
  return link;
}

HeraldEvent sample_herald(const ModelParams& params, RandomStream& rng) {
  HeraldEvent ev;
  ev.attempts_used = rng.geometric(params.p_succ);
  ev.reinit_blocks = (ev.attempts_used - 1) / params.max_attempts_m;
  ev.elapsed_time = static_cast<double>(ev.attempts_used) * params.attempt_duration +
                    static_cast<double>(ev.reinit_blocks) * params.reinit_overhead;
  ev.success = true;
  return ev;
}

double expected_attempts(const ModelParams& params) { return 1.0 / params.p_succ; }

double expected_reinit_blocks(const ModelParams& params) {
  // E[floor((K-1)/M)] for geometric K: sum_j q^(jM) = q^M / (1 - q^M)
  const double log_q_m =
      static_cast<double>(params.max_attempts_m) * std::log1p(-params.p_succ);
  const double qm = std::exp(log_q_m);         // 0 when p_succ == 1
  return qm / (-std::expm1(log_q_m));
}

double expected_rate(const ModelParams& params) {
  return expected_rate(params, params.reinit_overhead);
}

double expected_rate(const ModelParams& params, double overhead_per_block) {
  const double mean_time = expected_attempts(params) * params.attempt_duration +
                           expected_reinit_blocks(params) * overhead_per_block;
  return 1.0 / mean_time;
}

}  // namespace nvtel
