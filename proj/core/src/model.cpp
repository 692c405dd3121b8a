#include "nvtel/model.hpp"

#include <cmath>
#include <stdexcept>

namespace nvtel {

namespace {

void check_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
}

// Block-diagonal operator on (nitrogen_A, electron_A): `n0_op` acts on the
// electron within the m_I = 0 manifold, `n1_op` within m_I = -1.
Matrix nitrogen_blocks(const Matrix& n0_op, const Matrix& n1_op) {
  Matrix m = Matrix::Zero(4, 4);
  m.block(0, 0, 2, 2) = n0_op;
  m.block(2, 2, 2, 2) = n1_op;
  return m;
}

const std::vector<Slot> kAliceSlots = {Slot::nitrogen_a, Slot::electron_a};

}  // namespace

// Basis order (n, e) = n*2 + e; the e = 1 sector rotates, e = 0 is untouched.
Matrix rf_conditional_rotation(const Matrix& nuclear_rotation) {
  Matrix m = Matrix::Zero(4, 4);
  for (int n_out = 0; n_out < 2; ++n_out) {
    for (int n_in = 0; n_in < 2; ++n_in) {
      m(n_out * 2 + 1, n_in * 2 + 1) = nuclear_rotation(n_out, n_in);
      if (n_out == n_in) m(n_out * 2 + 0, n_in * 2 + 0) = 1.0;
    }
  }
  return m;
}

void NuclearPopulations::validate() const {
  check_unit_interval(p_plus1, "init_p_plus1");
  check_unit_interval(p_0, "init_p_0");
  check_unit_interval(p_minus1, "init_p_minus1");
  if (std::abs(sum() - 1.0) > 1e-9)
    throw std::invalid_argument("init populations must sum to 1");
}

void ModelParams::validate() const {
  if (!(hyperfine_a > 0.0))
    throw std::invalid_argument("hyperfine_a must be positive");
  if (!(t2_star > 0.0)) throw std::invalid_argument("t2_star must be positive");
  check_unit_interval(cnot_error_minus1, "cnot_error_minus1");
  check_unit_interval(cnot_error_0, "cnot_error_0");
  check_unit_interval(f_ro_e0_alice, "f_ro_e0_alice");
  check_unit_interval(f_ro_e1_alice, "f_ro_e1_alice");
  check_unit_interval(f_ro_e0_bob, "f_ro_e0_bob");
  check_unit_interval(f_ro_e1_bob, "f_ro_e1_bob");
  if (!(f_ro_e0_alice + f_ro_e1_alice > 1.0))
    throw std::invalid_argument("f_ro_e0_alice + f_ro_e1_alice must exceed 1");
  if (!(f_ro_e0_bob + f_ro_e1_bob > 1.0))
    throw std::invalid_argument("f_ro_e0_bob + f_ro_e1_bob must exceed 1");
  if (!(f_dd >= 0.5 && f_dd <= 1.0))
    throw std::invalid_argument("f_dd must lie in [0.5,1]");
  check_unit_interval(visibility, "visibility");
  if (!(p_flip_cycle >= 0.0 && p_flip_cycle <= 1.0 / 3.0))
    throw std::invalid_argument("p_flip_cycle must lie in [0,1/3]");
  init_populations.validate();
  if (max_attempts_m < 1)
    throw std::invalid_argument("max_attempts_m must be at least 1");
  if (!(p_succ > 0.0 && p_succ <= 1.0))
    throw std::invalid_argument("p_succ must lie in (0,1]");
  if (!(attempt_duration > 0.0))
    throw std::invalid_argument("attempt_duration must be positive");
  if (!(reinit_overhead >= 0.0))
    throw std::invalid_argument("reinit_overhead must be non-negative");
}

ModelParams ModelParams::ideal() {
  ModelParams p;
  p.cnot_error_minus1 = 0.0;
  p.cnot_error_0 = 0.0;
  p.phase_lambda = 0.0;
  p.phase_kappa = 0.0;
  p.f_ro_e0_alice = 1.0;
  p.f_ro_e1_alice = 1.0;
  p.f_ro_e0_bob = 1.0;
  p.f_ro_e1_bob = 1.0;
  p.f_dd = 1.0;
  p.visibility = 1.0;
  p.p_flip_cycle = 0.0;
  p.init_populations = NuclearPopulations{0.0, 0.0, 1.0};
  return p;
}

DensityState free_evolution(const DensityState& rho, double t,
                            const ModelParams& params) {
  Matrix u = Matrix::Identity(4, 4);
  u(0, 0) = std::polar(1.0, params.hyperfine_a * t);
  return apply_unitary(rho, UnitaryOp(u, kAliceSlots));
}

DensityState protected_nuclear_gate(const DensityState& rho,
                                    const Matrix& nuclear_rotation,
                                    const ModelParams& params,
                                    const GateTiming& timing) {
  return protected_nuclear_gate(rho, nuclear_rotation, nuclear_rotation, params,
                                timing);
}

DensityState protected_nuclear_gate(const DensityState& rho,
                                    const Matrix& first_rotation,
                                    const Matrix& second_rotation,
                                    const ModelParams& params,
                                    const GateTiming& timing) {
  UnitaryOp first(rf_conditional_rotation(first_rotation), kAliceSlots);
  UnitaryOp second(rf_conditional_rotation(second_rotation), kAliceSlots);
  UnitaryOp echo = UnitaryOp(gates::Y(), {Slot::electron_a});

  DensityState out = apply_unitary(rho, first);
  out = free_evolution(out, timing.echo_time, params);
  out = apply_unitary(out, echo);
  out = free_evolution(out, timing.total_time - timing.echo_time, params);
  return apply_unitary(out, second);
}

DensityState noisy_cnot(const DensityState& rho, const ModelParams& params) {
  const Matrix id = gates::identity2();
  const Matrix flip = gates::Y();

  // residual pulse phases on the m_I = 0 manifold
  Matrix phase = Matrix::Identity(2, 2);
  phase(0, 0) = std::polar(1.0, params.phase_kappa);
  phase(1, 1) = std::polar(1.0, params.phase_lambda);

  DensityState base =
      apply_unitary(rho, UnitaryOp(nitrogen_blocks(phase, id), kAliceSlots));

  const double e1 = params.cnot_error_minus1;
  const double e0 = params.cnot_error_0;
  struct Event {
    double weight;
    Matrix action;
    bool dephased;
  };
  const Event events[] = {
      {(1.0 - e1) * (1.0 - e0), nitrogen_blocks(id, flip), false},
      {e1 * (1.0 - e0), nitrogen_blocks(id, id), true},
      {(1.0 - e1) * e0, nitrogen_blocks(flip, flip), true},
      {e1 * e0, nitrogen_blocks(flip, id), true},
  };

  DensityState out;
  out.slots = rho.slots;
  out.matrix = Matrix::Zero(rho.dim(), rho.dim());
  for (const Event& ev : events) {
    if (ev.weight == 0.0) continue;
    DensityState branch = apply_unitary(base, UnitaryOp(ev.action, kAliceSlots));
    if (ev.dephased) branch = dephase(branch, Slot::electron_a);
    out.matrix += ev.weight * branch.matrix;
  }
  return out;
}

std::array<MeasurementResult, 2> electron_ssro(const DensityState& rho,
                                               Slot slot, double f0,
                                               double f1) {
  check_unit_interval(f0, "f0");
  check_unit_interval(f1, "f1");
  // unnormalized projections P_b rho P_b onto the slot's |0> / |1> sectors
  const int nq = rho.num_qubits();
  const int pos = rho.slot_position(slot);
  const int dim = rho.dim();
  const int bit = 1 << (nq - 1 - pos);
  Matrix true0 = Matrix::Zero(dim, dim);
  Matrix true1 = Matrix::Zero(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      if ((r & bit) != (c & bit)) continue;
      ((r & bit) ? true1 : true0)(r, c) = rho.matrix(r, c);
    }
  }

  std::array<MeasurementResult, 2> results;
  for (int declared = 0; declared < 2; ++declared) {
    Matrix mix;
    if (declared == 0)
      mix = f0 * true0 + (1.0 - f1) * true1;
    else
      mix = (1.0 - f0) * true0 + f1 * true1;
    double prob = mix.trace().real();
    MeasurementResult& res = results[declared];
    res.outcome = declared;
    res.probability = prob;
    res.conditional_state.slots = rho.slots;
    if (prob > 1e-15) {
      res.conditional_state.matrix = mix / prob;
      res.valid = true;
    } else {
      res.conditional_state.matrix = Matrix::Zero(dim, dim);
      res.valid = false;
    }
  }
  return results;
}

MeasurementResult electron_ssro_sample(const DensityState& rho, Slot slot,
                                       double f0, double f1,
                                       RandomStream& rng) {
  auto branches = electron_ssro(rho, slot, f0, f1);
  int declared = rng.bernoulli(branches[0].probability) ? 0 : 1;
  return branches[declared];
}

std::array<MeasurementResult, 2> nuclear_ssro(const DensityState& rho,
                                              const ModelParams& params,
                                              int rounds) {
  if (rounds < 1) throw std::invalid_argument("nuclear readout needs >= 1 round");
  struct Path {
    double prob;
    DensityState state;
    bool any_click;
  };
  std::vector<Path> paths = {{1.0, rho, false}};
  for (int r = 0; r < rounds; ++r) {
    std::vector<Path> next;
    next.reserve(paths.size() * 2);
    for (const Path& path : paths) {
      DensityState mapped =
          noisy_cnot(reset_slot(path.state, Slot::electron_a), params);
      auto branches = electron_ssro(mapped, Slot::electron_a,
                                    params.f_ro_e0_alice, params.f_ro_e1_alice);
      for (int declared = 0; declared < 2; ++declared) {
        const auto& b = branches[declared];
        if (!b.valid && b.probability <= 1e-15) {
          // keep zero-probability structure without propagating garbage
          next.push_back({0.0, path.state, path.any_click || declared == 0});
          continue;
        }
        next.push_back({path.prob * b.probability, b.conditional_state,
                        path.any_click || declared == 0});
      }
    }
    paths = std::move(next);
  }

  std::array<MeasurementResult, 2> results;
  for (int outcome = 0; outcome < 2; ++outcome) {
    // declared m_I = 0 iff a click was seen in any round
    Matrix mix = Matrix::Zero(rho.dim(), rho.dim());
    double prob = 0.0;
    for (const Path& path : paths) {
      bool is_zero_outcome = path.any_click;
      if ((outcome == 0) != is_zero_outcome) continue;
      prob += path.prob;
      mix += path.prob * path.state.matrix;
    }
    MeasurementResult& res = results[outcome];
    res.outcome = outcome;
    res.probability = prob;
    res.conditional_state.slots = rho.slots;
    if (prob > 1e-15) {
      res.conditional_state.matrix = mix / prob;
      res.valid = true;
    } else {
      res.conditional_state.matrix = Matrix::Zero(rho.dim(), rho.dim());
      res.valid = false;
    }
  }
  return results;
}

MeasurementResult nuclear_ssro_sample(const DensityState& rho,
                                      const ModelParams& params,
                                      RandomStream& rng, int rounds) {
  auto branches = nuclear_ssro(rho, params, rounds);
  int declared = rng.bernoulli(branches[0].probability) ? 0 : 1;
  return branches[declared];
}

NuclearPopulations depolarization_step(const NuclearPopulations& p,
                                       double p_flip) {
  // flow into the outer levels; p_0 loses exactly what the others gain
  const double d_minus = p_flip * (p.p_0 - p.p_minus1);
  const double d_plus = p_flip * (p.p_0 - p.p_plus1);
  NuclearPopulations out;
  out.p_minus1 = p.p_minus1 + d_minus;
  out.p_plus1 = p.p_plus1 + d_plus;
  out.p_0 = p.p_0 - d_minus - d_plus;
  return out;
}

double closed_form_p_minus1(double n, double p_flip) {
  if (n < 0.0) throw std::invalid_argument("n must be non-negative");
  return (2.0 + std::pow(1.0 - 3.0 * p_flip, n) + 3.0 * std::pow(1.0 - p_flip, n)) /
         6.0;
}

NuclearPopulations averaged_populations(const ModelParams& params) {
  const int steps = params.max_attempts_m / 2;
  NuclearPopulations p = params.init_populations;
  double sum_plus1 = p.p_plus1, sum_0 = p.p_0, sum_minus1 = p.p_minus1;
  for (int n = 1; n <= steps; ++n) {
    p = depolarization_step(p, params.p_flip_cycle);
    sum_plus1 += p.p_plus1;
    sum_0 += p.p_0;
    sum_minus1 += p.p_minus1;
  }
  const double count = steps + 1;
  return NuclearPopulations{sum_plus1 / count, sum_0 / count,
                            sum_minus1 / count};
}

}  // namespace nvtel
