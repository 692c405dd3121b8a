#pragma once

#include "nvtel/model.hpp"

#include <random>

namespace generators {

// randomized-but-plausible error model draws for property and consistency
// testing
inline nvtel::ModelParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  nvtel::ModelParams p;
  p.visibility = 0.5 + 0.5 * uni(rng);
  p.cnot_error_minus1 = 0.05 * uni(rng);
  p.cnot_error_0 = 0.05 * uni(rng);
  p.phase_lambda = 0.6 * (uni(rng) - 0.5);
  p.phase_kappa = 0.6 * (uni(rng) - 0.5);
  p.f_ro_e0_alice = 0.9 + 0.1 * uni(rng);
  p.f_ro_e1_alice = 0.9 + 0.1 * uni(rng);
  p.f_ro_e0_bob = 0.9 + 0.1 * uni(rng);
  p.f_ro_e1_bob = 0.9 + 0.1 * uni(rng);
  p.f_dd = 0.85 + 0.15 * uni(rng);
  p.p_flip_cycle = 0.003 * uni(rng);
  double p0 = 0.1 * uni(rng), pp = 0.1 * uni(rng);
  p.init_populations = nvtel::NuclearPopulations{pp, p0, 1.0 - p0 - pp};
  p.validate();
  return p;
}

}  // namespace generators
