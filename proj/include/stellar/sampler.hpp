// Copyright 2026 The stellarsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "stellar/bargmann.hpp"
#include "stellar/error.hpp"
#include "stellar/fock.hpp"
#include "stellar/gadget.hpp"
#include "stellar/gaussian.hpp"
#include "stellar/numerics.hpp"

namespace stellar {

using OutcomeSpec = std::vector<ProjectorSpec>;

inline constexpr double kInputLeakTolerance = 1e-8;

/// rho = preparation applied to core.
struct SystemInput {
  CoreState core;
  GaussianCircuit preparation;

  explicit SystemInput(CoreState c) : core(std::move(c)), preparation(core.modes()) {}
  SystemInput(CoreState c, GaussianCircuit g) : core(std::move(c)), preparation(std::move(g)) {
    if (preparation.modes() != core.modes()) {
      throw Error(ErrorCode::DimensionMismatch, "preparation circuit width differs from core state");
    }
  }

  std::size_t modes() const { return core.modes(); }

  TruncatedState materialize(int cutoff) const { return apply(preparation, to_truncated(core, cutoff)); }
};

struct SamplerSetup {
  std::size_t system_modes = 0;
  std::size_t measured_modes = 0;
  std::size_t auxiliary_count = 0;
  // (S^+ x 1)(gadget chain)^+ on system_modes + auxiliary_count modes, in application order.
  GaussianCircuit circuit;
  std::vector<std::size_t> auxiliary_owner;
  std::vector<double> xi;
  std::vector<Complex> targets;
  double normalization = 1.0;
  double main_prefactor = 1.0;
  double correction = 1.0;
  std::optional<SystemInput> structured_input;
  std::optional<TruncatedState> dense_input;

  std::size_t total_modes() const { return system_modes + auxiliary_count; }

  /// Core state of rho tensored with the auxiliary photons.
  CoreState assembled_input() const {
    if (!structured_input) throw Error(ErrorCode::InvalidArgument, "setup was built from a dense input");
    if (auxiliary_count == 0) return structured_input->core;
    return tensor(structured_input->core, CoreState::fock(std::vector<int>(auxiliary_count, 1)));
  }

  TruncatedState input_at(int cutoff) const {
    if (structured_input) return structured_input->materialize(cutoff);
    if (dense_input->cutoff() != cutoff) {
      throw Error(ErrorCode::DimensionMismatch, "dense input was given at cutoff " +
                                                    std::to_string(dense_input->cutoff()));
    }
    return *dense_input;
  }
};

namespace detail {

inline void require_adequate(const TruncatedState& state) {
  const double leak = state.leakage() + state.truncation_loss();
  if (leak > kInputLeakTolerance) {
    throw Error(ErrorCode::CutoffTooSmall, "input leaks " + format_number(leak) + " at cutoff " +
                                               std::to_string(state.cutoff()));
  }
}

inline SamplerSetup sampler_skeleton(std::size_t system_modes, const OutcomeSpec& outcome, const GadgetPlan& plan) {
  if (outcome.size() > system_modes) {
    throw Error(ErrorCode::DimensionMismatch, "outcome has more modes than the input");
  }
  if (plan.xi.size() != outcome.size()) {
    throw Error(ErrorCode::PlanMismatch, "plan covers " + std::to_string(plan.xi.size()) + " modes, outcome " +
                                             std::to_string(outcome.size()));
  }
  SamplerSetup setup;
  setup.system_modes = system_modes;
  setup.measured_modes = outcome.size();
  for (std::size_t k = 0; k < outcome.size(); ++k) {
    if (plan.xi[k].size() != outcome[k].additions.size()) {
      throw Error(ErrorCode::PlanMismatch, "plan length differs from projector rank on mode " + std::to_string(k));
    }
    setup.auxiliary_count += outcome[k].additions.size();
  }
  setup.circuit = GaussianCircuit(setup.total_modes());
  std::size_t aux = system_modes;
  for (std::size_t k = 0; k < outcome.size(); ++k) {
    const auto& spec = outcome[k];
    const int levels_cutoff = adequate_projector_cutoff(spec, spec.rank() + kProjectorHeadroom);
    setup.normalization *= build_projector_state(spec, levels_cutoff).normalization;
    std::vector<std::size_t> owned;
    for (std::size_t j = 0; j < spec.additions.size(); ++j) owned.push_back(aux++);
    for (std::size_t j = spec.additions.size(); j-- > 0;) {
      const Complex beta = spec.additions[j];
      const double x = plan.xi[k][j];
      if (beta != Complex(0.0)) setup.circuit.add(GaussianGate::displacement(k, -beta));
      setup.circuit.add(GaussianGate::two_mode_squeeze(k, owned[j], x));
      if (beta != Complex(0.0)) setup.circuit.add(GaussianGate::displacement(k, beta));
    }
    for (std::size_t j = 0; j < owned.size(); ++j) {
      setup.auxiliary_owner.push_back(k);
      setup.xi.push_back(plan.xi[k][j]);
    }
    setup.targets.push_back(spec.coherent);
  }
  for (std::size_t k = 0; k < outcome.size(); ++k) {
    if (outcome[k].squeeze != Complex(0.0)) setup.circuit.add(GaussianGate::squeeze(k, -outcome[k].squeeze));
  }
  double xi2 = 1.0;
  for (double x : setup.xi) {
    xi2 *= x * x;
    const double ratio = std::sinh(x) / (x * std::cosh(x) * std::cosh(x));
    setup.correction *= ratio * ratio;
  }
  setup.main_prefactor = 1.0 / (setup.normalization * xi2);
  return setup;
}

}  // namespace detail

inline SamplerSetup build_sampler(const SystemInput& input, const OutcomeSpec& outcome, const GadgetPlan& plan) {
  SamplerSetup setup = detail::sampler_skeleton(input.modes(), outcome, plan);
  setup.structured_input = input;
  return setup;
}

inline SamplerSetup build_sampler(const TruncatedState& input, const OutcomeSpec& outcome, const GadgetPlan& plan) {
  SamplerSetup setup = detail::sampler_skeleton(input.modes(), outcome, plan);
  setup.dense_input = input;
  return setup;
}

struct EstimateDetail {
  double p_estimate = 0.0;
  double p_tilde = 0.0;
  double scaled_overlap = 0.0;
  double input_leakage = 0.0;
};

/// Evolves the input plus lazily attached auxiliary photons through the setup circuit and
/// projects on the coherent targets; each auxiliary is projected right after its only gate.
inline EstimateDetail evaluate_sampler(const SamplerSetup& setup, int cutoff) {
  TruncatedState state = setup.input_at(cutoff);
  detail::require_adequate(state);
  EstimateDetail out;
  out.input_leakage = state.leakage() + state.truncation_loss();
  const std::size_t total = setup.total_modes();
  std::vector<std::size_t> last_use(total, 0);
  const auto& gates = setup.circuit.gates();
  for (std::size_t g = 0; g < gates.size(); ++g) {
    for (auto k : gates[g].modes) last_use[k] = g;
  }
  constexpr std::size_t kDetached = static_cast<std::size_t>(-1);
  std::vector<std::size_t> position(total, kDetached);
  for (std::size_t k = 0; k < setup.system_modes; ++k) position[k] = k;
  for (std::size_t g = 0; g < gates.size(); ++g) {
    GaussianGate local = gates[g];
    for (auto& k : local.modes) {
      if (position[k] == kDetached) {
        position[k] = state.modes();
        state = append_mode(state, fock_vector(1, cutoff));
      }
      k = position[k];
    }
    apply_local(state, local.modes, gate_matrix(local, cutoff));
    for (auto k : gates[g].modes) {
      if (k < setup.system_modes || last_use[k] != g) continue;
      const std::size_t removed = position[k];
      state = contract_mode(state, removed, fock_vector(0, cutoff));
      state *= Complex(1.0 / setup.xi[k - setup.system_modes]);
      position[k] = kDetached;
      for (auto& p : position) {
        if (p != kDetached && p > removed) --p;
      }
    }
  }
  for (std::size_t k = setup.measured_modes; k-- > 0;) {
    state = contract_mode(state, k, coherent_amplitudes(setup.targets[k], cutoff));
  }
  out.scaled_overlap = state.norm_squared();
  out.p_estimate = out.scaled_overlap / setup.normalization;
  out.p_tilde = out.p_estimate / setup.correction;
  return out;
}

inline double estimate_probability(const SamplerSetup& setup, int cutoff) {
  return evaluate_sampler(setup, cutoff).p_estimate;
}

/// Born probability of the leading len(outcome) modes; remaining modes are traced out.
inline double exact_probability(const TruncatedState& input, const OutcomeSpec& outcome) {
  detail::require_adequate(input);
  if (outcome.size() > input.modes()) throw Error(ErrorCode::DimensionMismatch, "outcome has too many modes");
  TruncatedState state = input;
  for (std::size_t k = outcome.size(); k-- > 0;) {
    const auto projector = build_projector_state(outcome[k], input.cutoff());
    state = contract_mode(state, k, projector.state.amplitudes());
  }
  return state.norm_squared();
}

inline double exact_probability(const CoreState& input, const OutcomeSpec& outcome, int cutoff) {
  return exact_probability(to_truncated(input, cutoff), outcome);
}

inline double exact_probability(const SystemInput& input, const OutcomeSpec& outcome, int cutoff) {
  return exact_probability(input.materialize(cutoff), outcome);
}

struct MarginalResult {
  double exact = 0.0;
  double estimate = 0.0;
  std::size_t auxiliary_count = 0;
};

inline MarginalResult marginal_probability(const TruncatedState& input, const OutcomeSpec& prefix,
                                           const GadgetPlan& plan) {
  MarginalResult out;
  out.exact = exact_probability(input, prefix);
  const SamplerSetup setup = build_sampler(input, prefix, plan);
  out.estimate = estimate_probability(setup, input.cutoff());
  out.auxiliary_count = setup.auxiliary_count;
  return out;
}

/// |perm(U[outputs, inputs])|^2 / (prod s! prod t!).
inline double bs_probability(const ComplexMatrix& u, const std::vector<int>& input, const std::vector<int>& output) {
  detail::require_square(u);
  if (input.size() != static_cast<std::size_t>(u.rows()) || output.size() != static_cast<std::size_t>(u.rows())) {
    throw Error(ErrorCode::DimensionMismatch, "occupation lists must match the interferometer size");
  }
  int n_in = 0;
  int n_out = 0;
  for (int v : input) n_in += v;
  for (int v : output) n_out += v;
  if (n_in != n_out) {
    throw Error(ErrorCode::PhotonNumberMismatch, std::to_string(n_in) + " photons in, " + std::to_string(n_out) + " out");
  }
  std::vector<Eigen::Index> rows, cols;
  double norm = 1.0;
  for (std::size_t i = 0; i < output.size(); ++i) {
    for (int c = 0; c < output[i]; ++c) rows.push_back(static_cast<Eigen::Index>(i));
    norm *= sqrt_factorial(output[i]) * sqrt_factorial(output[i]);
  }
  for (std::size_t j = 0; j < input.size(); ++j) {
    for (int c = 0; c < input[j]; ++c) cols.push_back(static_cast<Eigen::Index>(j));
    norm *= sqrt_factorial(input[j]) * sqrt_factorial(input[j]);
  }
  ComplexMatrix sub(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = u(rows[r], cols[c]);
  }
  return std::norm(permanent(sub)) / norm;
}

/// Fock-outcome probability of the circuit applied to vacuum, via the loop hafnian.
inline double gbs_probability(const GaussianCircuit& circuit, const std::vector<int>& output) {
  if (output.size() != circuit.modes()) throw Error(ErrorCode::DimensionMismatch, "outcome length");
  GaussianPureState state = GaussianPureState::vacuum(circuit.modes());
  state.apply(circuit);
  return state.probability(FockIndex(output));
}

enum class XiMode { Auto, Uniform };

struct StrongSimOptions {
  std::optional<GaussianCircuit> frame;
  XiMode xi_mode = XiMode::Auto;
  double xi = 1e-3;
  int plan_cutoff = 16;
};

struct StrongSimResult {
  double probability = 0.0;
  double p_tilde = 0.0;
  double approximation_distance = 0.0;
  std::size_t term_count = 0;
  std::size_t max_matrix_dimension = 0;
  GadgetPlan plan;
};

/// Core-state expansion: P = |c0|^2 |sum_n c_n conj(lhaf_n)/sqrt(n!)|^2 / N with auxiliary
/// vertices reweighted by 1/xi, which absorbs the 1/prod xi^2 prefactor.
inline StrongSimResult strong_simulate(const SystemInput& input, const OutcomeSpec& outcome, double epsilon,
                                       const StrongSimOptions& options = {}) {
  if (outcome.size() != input.modes()) {
    throw Error(ErrorCode::DimensionMismatch, "strong simulation needs an outcome for every mode");
  }
  StrongSimResult result;
  result.plan = options.xi_mode == XiMode::Auto
                    ? choose_xi(outcome, epsilon, input.modes(), options.plan_cutoff)
                    : GadgetPlan::uniform(outcome, options.xi);
  const SamplerSetup setup = build_sampler(input, outcome, result.plan);
  const std::size_t total = setup.total_modes();

  GaussianCircuit forward = input.preparation.widened(total);
  forward.append(setup.circuit);
  std::vector<Complex> target(total, Complex(0.0));
  for (std::size_t k = 0; k < setup.measured_modes; ++k) target[k] = setup.targets[k];
  GaussianPureState dual = GaussianPureState::coherent(target);
  dual.apply(forward.inverse());

  std::vector<double> weights(total, 1.0);
  for (std::size_t a = 0; a < setup.auxiliary_count; ++a) weights[setup.system_modes + a] = 1.0 / setup.xi[a];

  Complex sum = 0.0;
  for (const auto& [index, amplitude] : input.core.terms()) {
    std::vector<int> n = index.occupations;
    n.resize(total, 1);
    const FockIndex full(std::move(n));
    result.max_matrix_dimension = std::max(result.max_matrix_dimension, static_cast<std::size_t>(full.total()));
    sum += amplitude * std::conj(dual.relative_amplitude(full, weights));
    ++result.term_count;
  }
  result.probability = dual.vacuum_probability() * std::norm(sum) / setup.normalization;
  result.p_tilde = result.probability / setup.correction;
  return result;
}

/// Finite-rank approximation in the frame G0 followed by the core-state expansion.
inline StrongSimResult strong_simulate(const TruncatedState& input, const OutcomeSpec& outcome, double epsilon,
                                       int rank_budget, const StrongSimOptions& options = {}) {
  const GaussianCircuit frame = options.frame.value_or(GaussianCircuit(input.modes()));
  const TruncatedState framed = apply(frame, input);
  const RankTruncation approx = rank_truncate(framed, rank_budget);
  if (approx.trace_distance > epsilon) {
    throw Error(ErrorCode::RankBudgetTooSmall, "rank " + std::to_string(rank_budget) + " leaves trace distance " +
                                                   format_number(approx.trace_distance));
  }
  StrongSimResult result = strong_simulate(SystemInput(approx.core, frame.inverse()), outcome, epsilon, options);
  result.approximation_distance = approx.trace_distance;
  return result;
}

}  // namespace stellar
