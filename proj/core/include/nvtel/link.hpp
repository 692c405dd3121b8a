#pragma once

#include "nvtel/model.hpp"
#include "nvtel/quantum.hpp"
#include "nvtel/rng.hpp"

#include <cstdint>

namespace nvtel {

// Heralded two-electron link state over (electron_A, electron_B).
struct LinkState {
  DensityState rho23;
  double visibility_used = 0.0;
};

struct HeraldEvent {
  std::int64_t attempts_used = 0;
  std::int64_t reinit_blocks = 0;
  double elapsed_time = 0.0;
  bool success = false;
};

// rho = V |Psi-><Psi-| + (1-V)/2 (|01><01| + |10><10|); the visibility V is
// the photon indistinguishability and the only link imperfection modeled.
LinkState make_entangled_state(double visibility);

// Geometric attempt statistics: every completed block of max_attempts_m
// failed attempts triggers a nuclear re-initialization that costs
// reinit_overhead seconds on top of the per-attempt duration.
HeraldEvent sample_herald(const ModelParams& params, RandomStream& rng);

double expected_attempts(const ModelParams& params);        // 1 / p_succ
double expected_reinit_blocks(const ModelParams& params);   // q^M / (1 - q^M)
// 1 / (expected attempt time + amortized re-initialization overhead)
double expected_rate(const ModelParams& params);
double expected_rate(const ModelParams& params, double overhead_per_block);

}  // namespace nvtel
