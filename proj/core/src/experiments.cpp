#include "nvtel/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace nvtel {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490393;

double binomial_se(double p, std::int64_t n) {
  if (n <= 0) return 0.0;
  double v = p * (1.0 - p) / static_cast<double>(n);
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

FidelityEstimate analytic_estimate(double value) {
  return FidelityEstimate{value, 0.0, 0, EstimateMethod::analytic};
}

FidelityEstimate binomial_estimate(std::int64_t successes, std::int64_t n) {
  double p = n > 0 ? static_cast<double>(successes) / static_cast<double>(n) : 0.0;
  return FidelityEstimate{p, binomial_se(p, n), n, EstimateMethod::monte_carlo};
}

// Corrected state-fidelity estimate from declared-bit counts, oriented by the
// table's ideal result.
FidelityEstimate corrected_estimate(std::int64_t ideal_count, std::int64_t n,
                                    int ideal_bit, const ModelParams& params) {
  if (n <= 0) return FidelityEstimate{0.0, 0.0, 0, EstimateMethod::readout_corrected};
  std::int64_t n0 = ideal_bit == 0 ? ideal_count : n - ideal_count;
  std::int64_t n1 = n - n0;
  CorrectedCounts cc = readout_correction(n0, n1, params.f_ro_e0_bob,
                                          params.f_ro_e1_bob, 0.0, 0.0);
  double value = ideal_bit == 0 ? cc.c0 : cc.c1;
  return FidelityEstimate{value, cc.std_error, n, EstimateMethod::readout_corrected};
}

void run_chunked(std::int64_t n, int workers,
                 const std::function<void(int, std::int64_t, std::int64_t)>& body) {
  workers = std::clamp(workers, 1, 64);
  if (workers == 1 || n < 2 * workers) {
    body(0, 0, n);
    return;
  }
  std::vector<std::thread> threads;
  std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::int64_t lo = w * chunk;
    std::int64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    threads.emplace_back(body, w, lo, hi);
  }
  for (auto& t : threads) t.join();
}

SinusoidFit fit_sinusoid(const std::vector<double>& x,
                         const std::vector<double>& y, double omega) {
  const int m = static_cast<int>(x.size());
  Eigen::MatrixXd design(m, 3);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(omega * x[i]);
    design(i, 2) = std::sin(omega * x[i]);
    rhs(i) = y[i];
  }
  Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);
  SinusoidFit fit;
  fit.offset = coef(0);
  fit.amplitude = std::hypot(coef(1), coef(2));
  fit.phase = std::atan2(coef(2), coef(1)) / omega;  // peak location
  Eigen::VectorXd resid = design * coef - rhs;
  fit.residual_rms = std::sqrt(resid.squaredNorm() / m);
  fit.degenerate = fit.amplitude < 1e-9 * std::max(1.0, std::abs(fit.offset));
  return fit;
}

}  // namespace

std::string run_mode_name(RunMode m) {
  return m == RunMode::analytic ? "analytic" : "monte_carlo";
}

std::string estimate_method_name(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::analytic: return "analytic";
    case EstimateMethod::monte_carlo: return "monte_carlo";
    case EstimateMethod::readout_corrected: return "readout_corrected";
  }
  return "?";
}

std::string sweep_parameter_name(SweepParameter p) {
  return p == SweepParameter::rotation_axis_phase ? "rotation_axis_phase"
                                                  : "evolution_time";
}

// ---------------------------------------------------------------------------

TeleportRunResult run_teleportation(const ModelParams& params,
                                    const TeleportRunOptions& options) {
  params.validate();
  if (options.labels.empty())
    throw std::invalid_argument("run needs at least one input state");
  if (!options.shots_per_label.empty() &&
      options.shots_per_label.size() != options.labels.size())
    throw std::invalid_argument("shots_per_label must match the label list");

  TeleportRunResult result;
  const std::size_t n_labels = options.labels.size();
  result.per_state.resize(n_labels);

  double mean_f = 0.0, mean_f_var = 0.0;
  double mean_s = 0.0, mean_s_var = 0.0;
  double noff_analytic = 0.0;
  std::int64_t noff_success = 0, noff_total = 0;
  std::array<double, 4> distribution{};

  for (std::size_t li = 0; li < n_labels; ++li) {
    const StateLabel label = options.labels[li];
    const SourceState source = SourceState::canonical(label);
    StateRunResult& state = result.per_state[li];
    state.label = label;

    TeleportAnalysis analysis =
        teleport_analytic(params, source, options.protocol);
    if (li == 0) {
      result.w_minus1 = analysis.w_minus1;
      result.w_0 = analysis.w_0;
      result.w_plus1 = analysis.w_plus1;
    }

    if (options.mode == RunMode::analytic) {
      state.fidelity = analytic_estimate(analysis.fidelity);
      state.declared_success = analytic_estimate(analysis.declared_success);
      for (int o = 0; o < 4; ++o) {
        state.outcome_probability[o] = analysis.outcomes[o].probability;
        state.outcome_fidelity[o] = analysis.outcomes[o].state_fidelity;
        distribution[o] += analysis.outcomes[o].probability / n_labels;
      }
      noff_analytic += analysis.no_feedforward / n_labels;
    } else {
      const std::int64_t shots = options.shots_per_label.empty()
                                     ? options.shots
                                     : options.shots_per_label[li];
      if (shots < 1) throw std::invalid_argument("shots must be at least 1");
      CompiledTeleport compiled(params, source, options.protocol);

      std::array<bool, 4> inverted{};
      for (int o = 0; o < 4; ++o)
        inverted[o] = feed_forward(BsmOutcome::from_index(o), label)
                          .inverted_without_feedforward();

      struct Accum {
        std::array<std::int64_t, 4> outcome{};
        std::array<std::int64_t, 4> success_by_outcome{};
        std::int64_t success = 0;
        std::int64_t noff = 0;
      };
      const int workers = std::clamp(options.workers, 1, 64);
      std::vector<Accum> acc(static_cast<std::size_t>(workers) + 1);
      const std::uint64_t label_tag = static_cast<std::uint64_t>(label);
      run_chunked(shots, workers,
                  [&](int chunk, std::int64_t lo, std::int64_t hi) {
                    Accum& a = acc[chunk];
                    for (std::int64_t i = lo; i < hi; ++i) {
                      RandomStream rng(derive_seed(options.seed, label_tag,
                                                   static_cast<std::uint64_t>(i)));
                      TeleportRecord rec = compiled.sample(params, rng);
                      const int idx = rec.outcome.index();
                      a.outcome[idx]++;
                      if (rec.success_bit) {
                        a.success++;
                        a.success_by_outcome[idx]++;
                      }
                      bool noff_ok = inverted[idx] ? !rec.success_bit
                                                   : rec.success_bit;
                      if (noff_ok) a.noff++;
                    }
                  });
      Accum total;
      for (const Accum& a : acc) {
        for (int o = 0; o < 4; ++o) {
          total.outcome[o] += a.outcome[o];
          total.success_by_outcome[o] += a.success_by_outcome[o];
        }
        total.success += a.success;
        total.noff += a.noff;
      }

      const int ideal_bit = feed_forward(BsmOutcome{0, 0}, label).ideal_bit;
      state.declared_success = binomial_estimate(total.success, shots);
      state.fidelity = corrected_estimate(total.success, shots, ideal_bit, params);
      for (int o = 0; o < 4; ++o) {
        state.outcome_counts[o] = total.outcome[o];
        state.outcome_probability[o] =
            static_cast<double>(total.outcome[o]) / shots;
        state.outcome_fidelity[o] =
            corrected_estimate(total.success_by_outcome[o], total.outcome[o],
                               ideal_bit, params)
                .value;
        distribution[o] += state.outcome_probability[o] / n_labels;
      }
      noff_success += total.noff;
      noff_total += shots;
    }

    mean_f += state.fidelity.value / n_labels;
    mean_f_var += state.fidelity.std_error * state.fidelity.std_error /
                  (n_labels * n_labels);
    mean_s += state.declared_success.value / n_labels;
    mean_s_var += state.declared_success.std_error *
                  state.declared_success.std_error / (n_labels * n_labels);
  }

  result.outcome_distribution = distribution;
  if (options.mode == RunMode::analytic) {
    result.mean_fidelity = analytic_estimate(mean_f);
    result.mean_declared_success = analytic_estimate(mean_s);
    result.no_feedforward = analytic_estimate(noff_analytic);
  } else {
    result.mean_fidelity = FidelityEstimate{mean_f, std::sqrt(mean_f_var),
                                            noff_total,
                                            EstimateMethod::readout_corrected};
    result.mean_declared_success = FidelityEstimate{
        mean_s, std::sqrt(mean_s_var), noff_total, EstimateMethod::monte_carlo};
    result.no_feedforward = binomial_estimate(noff_success, noff_total);
  }
  return result;
}

// ---------------------------------------------------------------------------

namespace {

struct BellPrep {
  Matrix nuclear_rotation;
  bool extra_electron_flip;
};

BellPrep bell_prep(BellState b) {
  switch (b) {
    case BellState::phi_plus: return {gates::ybar(), true};
    case BellState::phi_minus: return {gates::y(), true};
    case BellState::psi_plus: return {gates::y(), false};
    case BellState::psi_minus: return {gates::ybar(), false};
  }
  throw std::invalid_argument("unknown Bell state");
}

// outcome probabilities of the full prepare-and-measure chain for one
// coherent nuclear branch (m_I = -1 or 0)
std::array<double, 4> benchmark_outcomes_coherent(const ModelParams& params,
                                                  const ModelParams& prep_params,
                                                  BellState bell, int branch) {
  const std::vector<Slot> slots = {Slot::nitrogen_a, Slot::electron_a};
  BellPrep prep = bell_prep(bell);
  DensityState rho =
      pure_density(basis_ket(branch == -1 ? 2 : 0, slots));  // |N 0>
  UnitaryOp flip(gates::Y(), {Slot::electron_a});
  rho = apply_unitary(rho, flip);
  rho = apply_unitary(
      rho, UnitaryOp(rf_conditional_rotation(prep.nuclear_rotation), slots));
  rho = noisy_cnot(rho, prep_params);
  if (prep.extra_electron_flip) rho = apply_unitary(rho, flip);

  rho = bell_state_map(rho, params);
  std::array<double, 4> probs{};
  for (const BsmBranch& b : bsm(rho, params)) probs[b.outcome.index()] = b.probability;
  return probs;
}

// m_I = +1: all nitrogen-selective pulses are off-resonant; the electron
// walks through the unconditional pulses deterministically.
std::array<double, 4> benchmark_outcomes_plus1(const ModelParams& params,
                                               BellState bell) {
  BellPrep prep = bell_prep(bell);
  // prep flip, optional extra flip, then the BSM gate echo
  int flips = 2 + (prep.extra_electron_flip ? 1 : 0);
  int e_true = flips % 2;
  const double p_e0 = e_true == 0 ? params.f_ro_e0_alice : 1.0 - params.f_ro_e1_alice;
  const double p_click = params.f_ro_e0_alice;
  const double p_n0 = 1.0 - (1.0 - p_click) * (1.0 - p_click);
  std::array<double, 4> probs{};
  for (int idx = 0; idx < 4; ++idx) {
    BsmOutcome o = BsmOutcome::from_index(idx);
    probs[idx] = (o.n_bit == 0 ? p_n0 : 1.0 - p_n0) *
                 (o.e_bit == 0 ? p_e0 : 1.0 - p_e0);
  }
  return probs;
}

}  // namespace

BsmBenchmarkResult bsm_benchmark(const ModelParams& params,
                                 const BsmBenchmarkOptions& options) {
  params.validate();
  BsmBenchmarkResult result;
  result.ideal_outcome = derive_bell_correspondence(params);

  ModelParams prep_params = params;
  if (options.ideal_preparation) {
    prep_params.cnot_error_minus1 = 0.0;
    prep_params.cnot_error_0 = 0.0;
  }
  NuclearPopulations pops = options.use_averaged_populations
                                ? averaged_populations(params)
                                : params.init_populations;
  if (options.ideal_preparation) pops = NuclearPopulations{0.0, 0.0, 1.0};

  for (std::size_t bi = 0; bi < kBellStates.size(); ++bi) {
    const BellState bell = kBellStates[bi];
    std::array<double, 4> probs{};
    if (pops.p_minus1 > 0.0) {
      auto p = benchmark_outcomes_coherent(params, prep_params, bell, -1);
      for (int o = 0; o < 4; ++o) probs[o] += pops.p_minus1 * p[o];
    }
    if (pops.p_0 > 0.0) {
      auto p = benchmark_outcomes_coherent(params, prep_params, bell, 0);
      for (int o = 0; o < 4; ++o) probs[o] += pops.p_0 * p[o];
    }
    if (pops.p_plus1 > 0.0) {
      auto p = benchmark_outcomes_plus1(params, bell);
      for (int o = 0; o < 4; ++o) probs[o] += pops.p_plus1 * p[o];
    }
    result.outcome_probability[bi] = probs;
    const int ideal_idx = result.ideal_outcome[bi].index();

    if (options.mode == RunMode::analytic) {
      result.p_ideal[bi] = probs[ideal_idx];
      result.std_error[bi] = 0.0;
    } else {
      if (options.shots < 1)
        throw std::invalid_argument("shots must be at least 1");
      std::int64_t hits = 0;
      for (std::int64_t i = 0; i < options.shots; ++i) {
        RandomStream rng(derive_seed(options.seed, 100 + bi,
                                     static_cast<std::uint64_t>(i)));
        if (rng.pick(probs.data(), 4) == ideal_idx) ++hits;
      }
      result.p_ideal[bi] = static_cast<double>(hits) / options.shots;
      result.std_error[bi] = binomial_se(result.p_ideal[bi], options.shots);
    }
    result.mean += result.p_ideal[bi] / 4.0;
    result.mean_std_error += result.std_error[bi] * result.std_error[bi] / 16.0;
  }
  result.mean_std_error = std::sqrt(result.mean_std_error);
  return result;
}

// ---------------------------------------------------------------------------

SweepResult calibration_sweep(const ModelParams& params, SweepParameter which,
                              const std::vector<double>& grid) {
  params.validate();
  if (grid.empty()) throw std::invalid_argument("sweep grid must not be empty");

  SweepResult result;
  result.parameter = which;
  result.parameter_name = sweep_parameter_name(which);
  result.values = grid;

  // nitrogen |1>, electron (|0>-|1>)/sqrt2: the link preparation seen from
  // Alice alone
  PureState cal = make_pure({0.0, 0.0, kInvSqrt2, -kInvSqrt2},
                            {Slot::nitrogen_a, Slot::electron_a});
  // nitrogen prepared in |x-> by the y rotation
  SourceState source = SourceState::from_amplitudes(-kInvSqrt2, kInvSqrt2);

  for (double v : grid) {
    BsmTuning tuning;
    if (which == SweepParameter::rotation_axis_phase)
      tuning.axis_phase = v;
    else
      tuning.timing = GateTiming{v, v};
    DensityState rho = prepare_source(pure_density(cal), source, params);
    rho = bell_state_map(rho, params, tuning);
    std::array<double, 4> probs{};
    for (const BsmBranch& b : bsm(rho, params)) probs[b.outcome.index()] = b.probability;
    result.outcome_probabilities.push_back(probs);
    result.objective.push_back(probs[0] + probs[3]);
  }

  const double omega = which == SweepParameter::rotation_axis_phase
                           ? 1.0
                           : params.hyperfine_a;
  result.fit = fit_sinusoid(result.values, result.objective, omega);
  result.fitted.resize(grid.size());
  const double delta = std::atan2(std::sin(omega * result.fit.phase),
                                  std::cos(omega * result.fit.phase));
  for (std::size_t i = 0; i < grid.size(); ++i)
    result.fitted[i] =
        result.fit.offset + result.fit.amplitude * std::cos(omega * grid[i] - delta);

  if (result.fit.degenerate) {
    auto it = std::max_element(result.objective.begin(), result.objective.end());
    result.optimum = grid[it - result.objective.begin()];
  } else {
    const double period = 2.0 * kPi / omega;
    const double lo = *std::min_element(grid.begin(), grid.end());
    const double hi = *std::max_element(grid.begin(), grid.end());
    double opt = result.fit.phase;
    opt = lo + std::fmod(opt - lo, period);
    if (opt < lo) opt += period;
    if (opt > hi) {
      // peak falls outside a sub-period sweep; take the best grid sample
      auto it = std::max_element(result.objective.begin(), result.objective.end());
      opt = grid[it - result.objective.begin()];
    }
    result.optimum = opt;
  }
  return result;
}

// ---------------------------------------------------------------------------

CorrectedCounts readout_correction(std::int64_t n0, std::int64_t n1, double f0,
                                   double f1, double sigma_f0, double sigma_f1) {
  if (n0 < 0 || n1 < 0 || n0 + n1 < 1)
    throw std::invalid_argument("readout correction needs at least one count");
  const double d = f0 + f1 - 1.0;
  if (!(d > 0.0))
    throw std::invalid_argument("confusion model is not invertible (f0+f1 <= 1)");
  const double n = static_cast<double>(n0 + n1);
  const double r0 = static_cast<double>(n0) / n;
  CorrectedCounts out;
  out.c0 = (r0 - (1.0 - f1)) / d;
  const double var_r0 = r0 * (1.0 - r0) / n;
  const double var = (var_r0 + out.c0 * out.c0 * sigma_f0 * sigma_f0 +
                      (1.0 - out.c0) * (1.0 - out.c0) * sigma_f1 * sigma_f1) /
                     (d * d);
  out.std_error = std::sqrt(var);
  if (out.c0 < 0.0 || out.c0 > 1.0) {
    out.clamped = true;
    out.c0 = std::clamp(out.c0, 0.0, 1.0);
  }
  out.c1 = 1.0 - out.c0;
  return out;
}

TomographyResult tomography_1q(double ex, double ey, double ez, Slot slot) {
  for (double e : {ex, ey, ez})
    if (!(e >= -1.0 && e <= 1.0))
      throw std::invalid_argument("expectation values must lie in [-1,1]");
  Matrix m = 0.5 * (gates::identity2() + ex * gates::sigma_x() +
                    ey * gates::sigma_y() + ez * gates::sigma_z());
  TomographyResult result{DensityState{std::move(m), {slot}}, true, 0.0};
  result.min_eigenvalue = result.rho.min_eigenvalue();
  result.physical = result.min_eigenvalue >= -kPsdTol;
  return result;
}

FidelityEstimate reanalyze_no_feedforward(
    const std::vector<TeleportRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("no records to reanalyze");
  std::int64_t ok = 0;
  for (const TeleportRecord& rec : records) {
    FeedForwardOp ff = feed_forward(rec.outcome, rec.input_label);
    int bit = rec.bob_declared_bit;
    if (ff.inverted_without_feedforward()) bit = 1 - bit;
    if (bit == ff.ideal_bit) ++ok;
  }
  return binomial_estimate(ok, static_cast<std::int64_t>(records.size()));
}

// ---------------------------------------------------------------------------

FlipCurveResult nuclear_flip_curve(const ModelParams& params,
                                   const FlipCurveOptions& options) {
  if (options.points < 2) throw std::invalid_argument("curve needs >= 2 points");
  FlipCurveResult result;
  result.attempts.resize(options.points);
  result.p_minus1.resize(options.points);
  for (int i = 0; i < options.points; ++i) {
    double a = options.attempts_max * i / (options.points - 1);
    result.attempts[i] = a;
    // one electron flip per two entanglement attempts
    result.p_minus1[i] =
        options.dress_scale * closed_form_p_minus1(a / 2.0, params.p_flip_cycle) +
        options.dress_offset;
  }

  const auto& x = result.attempts;
  const auto& y = result.p_minus1;
  const int m = options.points;
  double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double var_y = 0.0;
  for (double v : y) var_y += (v - mean_y) * (v - mean_y);
  if (var_y < 1e-18) {
    // flat curve: scale and flip rate are not identifiable
    result.fitted_p_flip = 0.0;
    result.fitted_scale = 0.0;
    result.fitted_offset = mean_y;
    result.fit_ok = false;
    return result;
  }

  auto rss_for = [&](double p, double* scale, double* offset) {
    double sgg = 0.0, sg = 0.0, sgy = 0.0, sy = 0.0;
    std::vector<double> g(m);
    for (int i = 0; i < m; ++i) {
      g[i] = closed_form_p_minus1(x[i] / 2.0, p);
      sgg += g[i] * g[i];
      sg += g[i];
      sgy += g[i] * y[i];
      sy += y[i];
    }
    const double det = sgg * m - sg * sg;
    double a, o;
    if (std::abs(det) < 1e-30) {
      a = 0.0;
      o = sy / m;
    } else {
      a = (sgy * m - sg * sy) / det;
      o = (sgg * sy - sg * sgy) / det;
    }
    double rss = 0.0;
    for (int i = 0; i < m; ++i) {
      double r = a * g[i] + o - y[i];
      rss += r * r;
    }
    if (scale) *scale = a;
    if (offset) *offset = o;
    return rss;
  };

  // coarse log-spaced scan then golden-section refinement
  const double p_lo = 1e-5, p_hi = 0.05;
  const int scan = 61;
  double best_p = p_lo, best_rss = std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < scan; ++i) {
    double p = p_lo * std::pow(p_hi / p_lo, static_cast<double>(i) / (scan - 1));
    double rss = rss_for(p, nullptr, nullptr);
    if (rss < best_rss) {
      best_rss = rss;
      best_p = p;
      best_i = i;
    }
  }
  double a = best_i > 0 ? p_lo * std::pow(p_hi / p_lo, (best_i - 1.0) / (scan - 1))
                        : p_lo;
  double b = best_i < scan - 1
                 ? p_lo * std::pow(p_hi / p_lo, (best_i + 1.0) / (scan - 1))
                 : p_hi;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = rss_for(c, nullptr, nullptr), fd = rss_for(d, nullptr, nullptr);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a);
      fc = rss_for(c, nullptr, nullptr);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a);
      fd = rss_for(d, nullptr, nullptr);
    }
  }
  best_p = 0.5 * (a + b);
  best_rss = rss_for(best_p, &result.fitted_scale, &result.fitted_offset);
  result.fitted_p_flip = best_p;
  result.residual_rms = std::sqrt(best_rss / m);
  result.fit_ok = best_p > 1.5 * p_lo && best_p < p_hi / 1.5 &&
                  std::isfinite(result.residual_rms);
  return result;
}

// ---------------------------------------------------------------------------

TomographyRunResult teleport_tomography(const ModelParams& params,
                                        StateLabel label, RunMode mode,
                                        std::int64_t shots, std::uint64_t seed,
                                        const TeleportOptions& options) {
  params.validate();
  const SourceState source = SourceState::canonical(label);
  // rotation mapping the ideal source state onto the row's ideal readout
  // eigenstate; composing with the inverse per-outcome operation aligns every
  // branch with the source state itself
  const Matrix w = feed_forward(BsmOutcome{0, 0}, label).matrix();

  struct AlignedCell {
    double probability;
    DensityState state;  // V_o rho_B V_o†
  };
  std::vector<AlignedCell> cells;
  double total = 0.0;
  for (const TeleportBranchOutcome& t :
       teleport_branch_outcomes(params, source, options)) {
    Matrix v = w.adjoint() * feed_forward(t.outcome, label).matrix();
    AlignedCell cell;
    cell.probability = t.weight * t.probability;
    cell.state = DensityState{v * t.bob.matrix * v.adjoint(), {Slot::electron_b}};
    total += cell.probability;
    cells.push_back(std::move(cell));
  }

  TomographyRunResult result;
  result.label = label;

  if (mode == RunMode::analytic) {
    Matrix mix = Matrix::Zero(2, 2);
    for (const AlignedCell& cell : cells)
      mix += (cell.probability / total) * cell.state.matrix;
    DensityState rho{std::move(mix), {Slot::electron_b}};
    result.ex = pauli_expectation(rho, Axis::X);
    result.ey = pauli_expectation(rho, Axis::Y);
    result.ez = pauli_expectation(rho, Axis::Z);
  } else {
    if (shots < 3) throw std::invalid_argument("tomography needs >= 3 shots");
    const Matrix bases[3] = {gates::ybar(), gates::x(), gates::identity2()};
    const std::int64_t per_basis = shots / 3;
    result.shots_per_basis = per_basis;
    double* est[3] = {&result.ex, &result.ey, &result.ez};
    double* se[3] = {&result.se_ex, &result.se_ey, &result.se_ez};
    for (int k = 0; k < 3; ++k) {
      // P(declare 0) per cell after the basis rotation and Bob's confusion
      std::vector<double> p_declare0(cells.size());
      for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        Matrix rotated = bases[k] * cells[ci].state.matrix * bases[k].adjoint();
        p_declare0[ci] = params.f_ro_e0_bob * rotated(0, 0).real() +
                         (1.0 - params.f_ro_e1_bob) * rotated(1, 1).real();
      }
      std::vector<double> cell_probs(cells.size());
      for (std::size_t ci = 0; ci < cells.size(); ++ci)
        cell_probs[ci] = cells[ci].probability / total;
      std::int64_t zeros = 0;
      for (std::int64_t i = 0; i < per_basis; ++i) {
        RandomStream rng(derive_seed(seed, 200 + k, static_cast<std::uint64_t>(i)));
        int ci = rng.pick(cell_probs.data(), static_cast<int>(cell_probs.size()));
        if (rng.bernoulli(p_declare0[ci])) ++zeros;
      }
      CorrectedCounts cc = readout_correction(zeros, per_basis - zeros,
                                              params.f_ro_e0_bob,
                                              params.f_ro_e1_bob, 0.0, 0.0);
      *est[k] = std::clamp(2.0 * cc.c0 - 1.0, -1.0, 1.0);
      *se[k] = 2.0 * cc.std_error;
    }
  }
  result.reconstruction = tomography_1q(result.ex, result.ey, result.ez);
  return result;
}

}  // namespace nvtel
