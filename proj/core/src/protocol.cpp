#include "nvtel/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace nvtel {

namespace {

using namespace std::complex_literals;

constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490393;

const std::vector<Slot> kBobSlot = {Slot::electron_b};

// RF pi/2 about +Y with the drive phase shifted by phi in the equatorial
// plane: R_phi = Rz(phi) y Rz(-phi).
Matrix axis_phased_half_y(double phi) {
  Matrix zp = Matrix::Zero(2, 2);
  zp(0, 0) = std::polar(1.0, -phi / 2.0);
  zp(1, 1) = std::polar(1.0, phi / 2.0);
  return zp * gates::y() * zp.adjoint();
}

struct TableRow {
  StateLabel label;
  std::array<FfOp, 4> ops;  // outcomes 00, 01, 10, 11
  int ideal_bit;
};

// Feed-forward and readout operations applied for each BSM outcome.
constexpr std::array<TableRow, 6> kFeedForwardTable = {{
    {StateLabel::plus_z, {FfOp::identity, FfOp::Y, FfOp::identity, FfOp::Y}, 0},
    {StateLabel::minus_z, {FfOp::Y, FfOp::identity, FfOp::Y, FfOp::identity}, 0},
    {StateLabel::plus_x, {FfOp::ybar, FfOp::y, FfOp::y, FfOp::ybar}, 0},
    {StateLabel::minus_x, {FfOp::y, FfOp::ybar, FfOp::ybar, FfOp::y}, 0},
    {StateLabel::plus_y, {FfOp::xbar, FfOp::xbar, FfOp::x, FfOp::x}, 1},
    {StateLabel::minus_y, {FfOp::x, FfOp::x, FfOp::xbar, FfOp::xbar}, 1},
}};

const TableRow& table_row(StateLabel label) {
  for (const TableRow& row : kFeedForwardTable)
    if (row.label == label) return row;
  throw std::invalid_argument("unknown input label");
}

Matrix ff_matrix(FfOp op) {
  switch (op) {
    case FfOp::identity: return gates::identity2();
    case FfOp::Y: return gates::Y();
    case FfOp::x: return gates::x();
    case FfOp::xbar: return gates::xbar();
    case FfOp::y: return gates::y();
    case FfOp::ybar: return gates::ybar();
  }
  throw std::invalid_argument("unknown feed-forward operation");
}

DensityState initial_three_qubit(const ModelParams& params, int branch) {
  PureState nitrogen =
      basis_ket(branch == -1 ? 1 : 0, {Slot::nitrogen_a});
  LinkState link = make_entangled_state(params.visibility);
  return tensor_product(pure_density(nitrogen), link.rho23);
}

DensityState pipeline_to_readout(const ModelParams& params,
                                 const SourceState& source,
                                 const TeleportOptions& options, int branch) {
  DensityState rho = initial_three_qubit(params, branch);
  rho = prepare_source(rho, source, params);
  rho = bell_state_map(rho, params);
  return apply_decoupling(rho, params, options.channel);
}

// P(Bob declares `bit`) for a single-qubit state through his confusion model.
double bob_declare_probability(const DensityState& bob, int bit,
                               const ModelParams& params) {
  const double pop0 = bob.matrix(0, 0).real();
  const double pop1 = bob.matrix(1, 1).real();
  if (bit == 0) return params.f_ro_e0_bob * pop0 + (1.0 - params.f_ro_e1_bob) * pop1;
  return params.f_ro_e1_bob * pop1 + (1.0 - params.f_ro_e0_bob) * pop0;
}

struct BranchWeights {
  double w_minus1, w_0, w_plus1;
};

BranchWeights branch_weights(const ModelParams& params,
                             const TeleportOptions& options) {
  if (options.corrected_initialization) return {1.0, 0.0, 0.0};
  NuclearPopulations avg = averaged_populations(params);
  return {avg.p_minus1, avg.p_0, avg.p_plus1};
}

}  // namespace

std::string label_name(StateLabel l) {
  switch (l) {
    case StateLabel::plus_z: return "+z";
    case StateLabel::minus_z: return "-z";
    case StateLabel::plus_x: return "+x";
    case StateLabel::minus_x: return "-x";
    case StateLabel::plus_y: return "+y";
    case StateLabel::minus_y: return "-y";
  }
  return "?";
}

std::optional<StateLabel> parse_label(std::string_view name) {
  for (StateLabel l : kSixStates)
    if (label_name(l) == name) return l;
  return std::nullopt;
}

SourceState SourceState::from_amplitudes(Complex alpha, Complex beta) {
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > kExactTol)
    throw std::invalid_argument("source amplitudes are not normalized");
  return SourceState{alpha, beta, std::nullopt};
}

SourceState SourceState::canonical(StateLabel l) {
  SourceState s;
  s.label = l;
  switch (l) {
    case StateLabel::plus_z:  s.alpha = 1.0; s.beta = 0.0; break;
    case StateLabel::minus_z: s.alpha = 0.0; s.beta = 1.0; break;
    case StateLabel::plus_x:  s.alpha = kInvSqrt2; s.beta = kInvSqrt2; break;
    case StateLabel::minus_x: s.alpha = kInvSqrt2; s.beta = -kInvSqrt2; break;
    case StateLabel::plus_y:  s.alpha = kInvSqrt2; s.beta = Complex(0.0, kInvSqrt2); break;
    case StateLabel::minus_y: s.alpha = kInvSqrt2; s.beta = Complex(0.0, -kInvSqrt2); break;
  }
  return s;
}

Matrix SourceState::preparation_rotation() const {
  if (label) {
    switch (*label) {
      case StateLabel::plus_z:  return gates::Y();
      case StateLabel::minus_z: return gates::identity2();
      case StateLabel::plus_x:  return gates::ybar();
      case StateLabel::minus_x: return gates::y();
      // the RF drive phase convention of the nitrogen mirrors x and xbar
      // relative to the electron; x|1> lands on +y, xbar|1> on -y
      case StateLabel::plus_y:  return gates::x();
      case StateLabel::minus_y: return gates::xbar();
    }
  }
  Matrix r(2, 2);
  r << std::conj(beta), alpha, -std::conj(alpha), beta;
  return r;
}

PureState SourceState::ket(Slot slot) const {
  return make_pure({alpha, beta}, {slot});
}

BsmOutcome BsmOutcome::from_index(int idx) {
  if (idx < 0 || idx > 3) throw std::invalid_argument("outcome index out of range");
  return BsmOutcome{idx / 2, idx % 2};
}

std::string BsmOutcome::str() const {
  return std::string(1, static_cast<char>('0' + n_bit)) +
         static_cast<char>('0' + e_bit);
}

std::string ff_op_name(FfOp op) {
  switch (op) {
    case FfOp::identity: return "I";
    case FfOp::Y: return "Y";
    case FfOp::x: return "x";
    case FfOp::xbar: return "xbar";
    case FfOp::y: return "y";
    case FfOp::ybar: return "ybar";
  }
  return "?";
}

Matrix FeedForwardOp::matrix() const { return ff_matrix(operation); }

bool FeedForwardOp::inverted_without_feedforward() const {
  // the partner operation within each table row differs by a Z-population
  // flip; Y and the negative-sense pulses are the flipped partners
  return operation == FfOp::Y || operation == FfOp::xbar ||
         operation == FfOp::ybar;
}

FeedForwardOp feed_forward(const BsmOutcome& outcome, StateLabel input) {
  const TableRow& row = table_row(input);
  FeedForwardOp op;
  op.outcome = outcome;
  op.input_label = input;
  op.operation = row.ops[outcome.index()];
  op.ideal_bit = row.ideal_bit;
  return op;
}

DensityState prepare_source(const DensityState& post_herald,
                            const SourceState& source,
                            const ModelParams& params,
                            const GateTiming& timing) {
  return protected_nuclear_gate(post_herald, source.preparation_rotation(),
                                params, timing);
}

DensityState bell_state_map(const DensityState& rho, const ModelParams& params,
                            const BsmTuning& tuning) {
  DensityState out = noisy_cnot(rho, params);
  return protected_nuclear_gate(out, axis_phased_half_y(tuning.axis_phase),
                                gates::y(), params, tuning.timing);
}

DensityState apply_decoupling(const DensityState& rho, const ModelParams& params,
                              DecouplingChannel channel) {
  Matrix xyx = gates::X() * gates::Y() * gates::X();
  DensityState out = apply_unitary(rho, UnitaryOp(xyx, kBobSlot));
  if (channel == DecouplingChannel::depolarizing) {
    return depolarize(out, Slot::electron_b, 2.0 * params.f_dd - 1.0);
  }
  // phase flip with q = 3(1-f_dd)/2 gives the same sphere-averaged
  // preservation fidelity f_dd
  const double q = 3.0 * (1.0 - params.f_dd) / 2.0;
  DensityState flipped =
      apply_unitary(out, UnitaryOp(gates::sigma_z(), kBobSlot));
  DensityState mixed;
  mixed.slots = out.slots;
  mixed.matrix = (1.0 - q) * out.matrix + q * flipped.matrix;
  return mixed;
}

std::vector<BsmBranch> bsm(const DensityState& rho, const ModelParams& params) {
  const bool has_bob = rho.has_slot(Slot::electron_b);
  std::array<double, 4> probs{};
  std::array<Matrix, 4> bob_mix;
  if (has_bob)
    for (auto& m : bob_mix) m = Matrix::Zero(2, 2);

  auto electron = electron_ssro(rho, Slot::electron_a, params.f_ro_e0_alice,
                                params.f_ro_e1_alice);
  for (int e_bit = 0; e_bit < 2; ++e_bit) {
    const auto& e_branch = electron[e_bit];
    if (!e_branch.valid) continue;
    auto nuclear = nuclear_ssro(e_branch.conditional_state, params);
    for (int n_bit = 0; n_bit < 2; ++n_bit) {
      const auto& n_branch = nuclear[n_bit];
      double p = e_branch.probability * n_branch.probability;
      int idx = BsmOutcome{n_bit, e_bit}.index();
      probs[idx] += p;
      if (has_bob && n_branch.valid)
        bob_mix[idx] += p * partial_trace(n_branch.conditional_state, kBobSlot).matrix;
    }
  }

  std::vector<BsmBranch> out(4);
  for (int idx = 0; idx < 4; ++idx) {
    out[idx].outcome = BsmOutcome::from_index(idx);
    out[idx].probability = probs[idx];
    if (has_bob && probs[idx] > 1e-15)
      out[idx].bob = DensityState{bob_mix[idx] / probs[idx], kBobSlot};
  }
  return out;
}

BsmBranch bsm_sample(const DensityState& rho, const ModelParams& params,
                     RandomStream& rng) {
  MeasurementResult e = electron_ssro_sample(rho, Slot::electron_a,
                                             params.f_ro_e0_alice,
                                             params.f_ro_e1_alice, rng);
  MeasurementResult n =
      nuclear_ssro_sample(e.conditional_state, params, rng);
  BsmBranch branch;
  branch.outcome = BsmOutcome{n.outcome, e.outcome};
  branch.probability = e.probability * n.probability;
  if (rho.has_slot(Slot::electron_b) && n.valid)
    branch.bob = partial_trace(n.conditional_state, kBobSlot);
  return branch;
}

std::array<BsmOutcome, 4> derive_bell_correspondence(const ModelParams& params) {
  ModelParams ideal = params;
  ideal.cnot_error_minus1 = 0.0;
  ideal.cnot_error_0 = 0.0;
  ideal.phase_lambda = 0.0;
  ideal.phase_kappa = 0.0;

  std::array<BsmOutcome, 4> map{};
  for (std::size_t b = 0; b < kBellStates.size(); ++b) {
    DensityState rho = pure_density(
        bell_ket(kBellStates[b], {Slot::nitrogen_a, Slot::electron_a}));
    DensityState mapped = bell_state_map(rho, ideal);
    int best = 0;
    double best_p = -1.0;
    for (int idx = 0; idx < 4; ++idx) {
      double p = mapped.matrix(idx, idx).real();
      if (p > best_p) {
        best_p = p;
        best = idx;
      }
    }
    if (best_p < 1.0 - 1e-9)
      throw std::runtime_error(
          "Bell-state mapping is not deterministic for " +
          bell_name(kBellStates[b]));
    map[b] = BsmOutcome::from_index(best);
  }
  return map;
}

std::vector<TeleportBranchOutcome> teleport_branch_outcomes(
    const ModelParams& params, const SourceState& source,
    const TeleportOptions& options) {
  const BranchWeights w = branch_weights(params, options);
  std::vector<TeleportBranchOutcome> out;
  out.reserve(12);

  const struct {
    int branch;
    double weight;
  } coherent[] = {{-1, w.w_minus1}, {0, w.w_0}};
  for (const auto& [branch, weight] : coherent) {
    if (weight == 0.0) continue;
    DensityState rho = pipeline_to_readout(params, source, options, branch);
    for (const BsmBranch& b : bsm(rho, params)) {
      TeleportBranchOutcome t;
      t.nuclear_branch = branch;
      t.weight = weight;
      t.outcome = b.outcome;
      t.probability = b.probability;
      t.bob = b.bob ? *b.bob : maximally_mixed(kBobSlot);
      out.push_back(std::move(t));
    }
  }

  if (w.w_plus1 > 0.0) {
    // m_I = +1: every nitrogen-selective pulse is off-resonant, the module's
    // fully-mixed approximation for the target. The electron readout sees
    // Alice's half of the link (maximally mixed); both nuclear-readout rounds
    // leave the reset electron bright.
    const double p_e0 =
        (params.f_ro_e0_alice + 1.0 - params.f_ro_e1_alice) / 2.0;
    const double p_click = params.f_ro_e0_alice;
    const double p_n0 = 1.0 - (1.0 - p_click) * (1.0 - p_click);
    for (int idx = 0; idx < 4; ++idx) {
      BsmOutcome o = BsmOutcome::from_index(idx);
      TeleportBranchOutcome t;
      t.nuclear_branch = +1;
      t.weight = w.w_plus1;
      t.outcome = o;
      t.probability = (o.n_bit == 0 ? p_n0 : 1.0 - p_n0) *
                      (o.e_bit == 0 ? p_e0 : 1.0 - p_e0);
      t.bob = maximally_mixed(kBobSlot);
      out.push_back(std::move(t));
    }
  }
  return out;
}

TeleportAnalysis teleport_analytic(const ModelParams& params,
                                   const SourceState& source,
                                   const TeleportOptions& options) {
  if (!source.label)
    throw std::invalid_argument("feed-forward needs a labeled source state");
  const StateLabel label = *source.label;
  const BranchWeights w = branch_weights(params, options);

  TeleportAnalysis res;
  res.w_minus1 = w.w_minus1;
  res.w_0 = w.w_0;
  res.w_plus1 = w.w_plus1;

  std::array<double, 4> prob{};
  std::array<double, 4> fidelity_weighted{};
  std::array<double, 4> declared_weighted{};

  for (const TeleportBranchOutcome& t :
       teleport_branch_outcomes(params, source, options)) {
    const int idx = t.outcome.index();
    FeedForwardOp ff = feed_forward(t.outcome, label);
    Matrix u = ff.matrix();
    Matrix corrected = u * t.bob.matrix * u.adjoint();
    const double f = corrected(ff.ideal_bit, ff.ideal_bit).real();
    DensityState corrected_state{corrected, kBobSlot};
    const double s = bob_declare_probability(corrected_state, ff.ideal_bit, params);
    const double joint = t.weight * t.probability;
    prob[idx] += joint;
    fidelity_weighted[idx] += joint * f;
    declared_weighted[idx] += joint * s;
  }

  for (int idx = 0; idx < 4; ++idx) {
    TeleportOutcomeStat& stat = res.outcomes[idx];
    stat.outcome = BsmOutcome::from_index(idx);
    stat.probability = prob[idx];
    FeedForwardOp ff = feed_forward(stat.outcome, label);
    stat.inverted_no_ff = ff.inverted_without_feedforward();
    if (prob[idx] > 1e-15) {
      stat.state_fidelity = fidelity_weighted[idx] / prob[idx];
      stat.declared_success = declared_weighted[idx] / prob[idx];
    }
    res.fidelity += fidelity_weighted[idx];
    res.declared_success += declared_weighted[idx];
    res.no_feedforward +=
        stat.inverted_no_ff ? prob[idx] - declared_weighted[idx]
                            : declared_weighted[idx];
  }
  return res;
}

TeleportRecord teleport_once(const ModelParams& params,
                             const SourceState& source, RandomStream& rng,
                             const TeleportOptions& options) {
  if (!source.label)
    throw std::invalid_argument("feed-forward needs a labeled source state");
  const StateLabel label = *source.label;
  const BranchWeights w = branch_weights(params, options);

  TeleportRecord rec;
  rec.input_label = label;
  rec.seed = rng.seed();
  rec.herald = sample_herald(params, rng);

  const double weights[3] = {w.w_minus1, w.w_0, w.w_plus1};
  const int branch_of[3] = {-1, 0, +1};
  rec.nuclear_branch = branch_of[rng.pick(weights, 3)];

  FeedForwardOp ff;
  if (rec.nuclear_branch == +1) {
    const double p_click = params.f_ro_e0_alice;
    bool click = rng.bernoulli(p_click) || rng.bernoulli(p_click);
    const double p_e0 =
        (params.f_ro_e0_alice + 1.0 - params.f_ro_e1_alice) / 2.0;
    rec.outcome = BsmOutcome{click ? 0 : 1, rng.bernoulli(p_e0) ? 0 : 1};
    ff = feed_forward(rec.outcome, label);
    DensityState bob = maximally_mixed(kBobSlot);
    MeasurementResult ro = electron_ssro_sample(
        bob, Slot::electron_b, params.f_ro_e0_bob, params.f_ro_e1_bob, rng);
    rec.bob_declared_bit = ro.outcome;
  } else {
    DensityState rho =
        pipeline_to_readout(params, source, options, rec.nuclear_branch);
    BsmBranch branch = bsm_sample(rho, params, rng);
    rec.outcome = branch.outcome;
    ff = feed_forward(rec.outcome, label);
    DensityState bob = branch.bob ? *branch.bob : maximally_mixed(kBobSlot);
    bob = apply_unitary(bob, UnitaryOp(ff.matrix(), kBobSlot));
    MeasurementResult ro = electron_ssro_sample(
        bob, Slot::electron_b, params.f_ro_e0_bob, params.f_ro_e1_bob, rng);
    rec.bob_declared_bit = ro.outcome;
  }
  rec.success_bit = rec.bob_declared_bit == ff.ideal_bit;
  return rec;
}

CompiledTeleport::CompiledTeleport(const ModelParams& params,
                                   const SourceState& source,
                                   const TeleportOptions& options) {
  if (!source.label)
    throw std::invalid_argument("feed-forward needs a labeled source state");
  label_ = *source.label;
  ideal_bit_ = table_row(label_).ideal_bit;
  analysis_ = teleport_analytic(params, source, options);

  for (const TeleportBranchOutcome& t :
       teleport_branch_outcomes(params, source, options)) {
    FeedForwardOp ff = feed_forward(t.outcome, label_);
    Matrix u = ff.matrix();
    DensityState corrected{u * t.bob.matrix * u.adjoint(), kBobSlot};
    Cell cell;
    cell.probability = t.weight * t.probability;
    cell.nuclear_branch = t.nuclear_branch;
    cell.outcome = t.outcome;
    cell.p_declare_ideal =
        bob_declare_probability(corrected, ff.ideal_bit, params);
    cells_.push_back(cell);
  }
}

TeleportRecord CompiledTeleport::sample(const ModelParams& params,
                                        RandomStream& rng) const {
  TeleportRecord rec;
  rec.input_label = label_;
  rec.seed = rng.seed();
  rec.herald = sample_herald(params, rng);

  double u = rng.uniform();
  double cum = 0.0;
  const Cell* chosen = &cells_.back();
  for (const Cell& cell : cells_) {
    cum += cell.probability;
    if (u < cum) {
      chosen = &cell;
      break;
    }
  }
  rec.nuclear_branch = chosen->nuclear_branch;
  rec.outcome = chosen->outcome;
  const bool declares_ideal = rng.bernoulli(chosen->p_declare_ideal);
  rec.bob_declared_bit = declares_ideal ? ideal_bit_ : 1 - ideal_bit_;
  rec.success_bit = declares_ideal;
  return rec;
}

}  // namespace nvtel
