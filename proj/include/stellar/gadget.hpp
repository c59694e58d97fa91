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

#include <cmath>
#include <string>
#include <vector>

#include "stellar/error.hpp"
#include "stellar/fock.hpp"
#include "stellar/gaussian.hpp"

namespace stellar {

inline constexpr double kMaxXi = 0.5;
inline constexpr double kMinXi = 1e-12;

namespace detail {

inline void require_mode(const TruncatedState& state, std::size_t mode) {
  if (mode >= state.modes()) throw Error(ErrorCode::DimensionMismatch, "mode out of range");
}

// Multiplies amplitude n on `mode` by f(n, index) for every basis state.
template <class F>
TruncatedState map_mode(const TruncatedState& state, std::size_t mode, int shift, F&& f) {
  TruncatedState out(state.modes(), state.cutoff(), false);
  const std::size_t stride = state.stride(mode);
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    const int n = static_cast<int>((i / stride) % state.levels());
    const int target = n + shift;
    if (target < 0 || target > state.cutoff()) continue;
    out[i + static_cast<std::size_t>(shift) * stride] += f(n) * state[i];
  }
  return out;
}

inline void require_headroom(const TruncatedState& state, std::size_t mode) {
  const std::size_t stride = state.stride(mode);
  double top = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    if (static_cast<int>((i / stride) % state.levels()) == state.cutoff()) top += std::norm(state[i]);
  }
  if (top > 1e-10 * std::max(1e-300, state.norm_squared())) {
    throw Error(ErrorCode::CutoffTooSmall, "photon addition needs an empty top level");
  }
}

// Attach |1> as a new last mode, apply the two-mode gate, project the new mode on <0|.
inline TruncatedState auxiliary_photon_gadget(const TruncatedState& state, std::size_t mode,
                                              const GaussianGate& gate_template) {
  TruncatedState extended = append_mode(state, fock_vector(1, state.cutoff()));
  GaussianGate gate = gate_template;
  gate.modes = {mode, state.modes()};
  apply_local(extended, gate.modes, gate_matrix(gate, state.cutoff()));
  TruncatedState out = contract_mode(extended, state.modes(), fock_vector(0, state.cutoff()));
  out.set_normalized(false);
  return out;
}

}  // namespace detail

/// (cosh xi)^{-n} a on the given mode.
inline TruncatedState attenuated_subtract(const TruncatedState& state, std::size_t mode, double xi) {
  detail::require_mode(state, mode);
  if (!(xi > 0.0)) throw Error(ErrorCode::InvalidArgument, "xi must be positive");
  const double ch = std::cosh(xi);
  return detail::map_mode(state, mode, -1, [&](int n) {
    return Complex(std::sqrt(static_cast<double>(n)) * std::pow(ch, -(n - 1)));
  });
}

/// Auxiliary |1>, two-mode squeezer, auxiliary projected on vacuum.
inline TruncatedState subtraction_gadget(const TruncatedState& state, std::size_t mode, double xi) {
  detail::require_mode(state, mode);
  if (!(xi > 0.0 && xi <= kMaxXi)) throw Error(ErrorCode::InvalidArgument, "xi must lie in (0, 0.5]");
  if (state.cutoff() < 1) throw Error(ErrorCode::CutoffTooSmall, "gadget needs cutoff >= 1");
  return detail::auxiliary_photon_gadget(state, mode, GaussianGate::two_mode_squeeze(0, 1, xi));
}

/// Prefactor relating the subtraction gadget to attenuated_subtract.
inline double subtraction_gadget_prefactor(double xi) {
  const double ch = std::cosh(xi);
  return -std::sinh(xi) / (ch * ch);
}

/// Auxiliary |1>, beamsplitter BS(|zeta|, arg zeta), auxiliary projected on vacuum.
inline TruncatedState addition_gadget(const TruncatedState& state, std::size_t mode, Complex zeta) {
  detail::require_mode(state, mode);
  const double gamma = std::abs(zeta);
  if (!(gamma > 0.0 && gamma <= kMaxXi)) {
    throw Error(ErrorCode::InvalidArgument, "|zeta| must lie in (0, 0.5]");
  }
  if (state.cutoff() < 1) throw Error(ErrorCode::CutoffTooSmall, "gadget needs cutoff >= 1");
  detail::require_headroom(state, mode);
  return detail::auxiliary_photon_gadget(state, mode,
                                         GaussianGate::beamsplitter(0, 1, gamma, std::arg(zeta)));
}

/// e^{i delta} tan(gamma) (cos gamma)^n a^+ on the given mode, n counted after the addition.
inline TruncatedState addition_closed_form(const TruncatedState& state, std::size_t mode, Complex zeta) {
  detail::require_mode(state, mode);
  const double gamma = std::abs(zeta);
  const Complex front = std::polar(std::tan(gamma), std::arg(zeta));
  return detail::map_mode(state, mode, +1, [&](int n) {
    return front * std::pow(std::cos(gamma), n + 1) * std::sqrt(static_cast<double>(n + 1));
  });
}

/// sqrt((1 + |phi|^2)^2 / 4 - |<psi|phi>|^2) for normalized psi.
inline double trace_distance_pure(const TruncatedState& psi, const TruncatedState& phi) {
  if (std::abs(psi.norm_squared() - 1.0) > kTruncatedNormTolerance) {
    throw Error(ErrorCode::NormalizationError, "first argument must be normalized");
  }
  const double n2 = phi.norm_squared();
  const double overlap = std::norm(inner_product(psi, phi));
  return std::sqrt(std::max(0.0, 0.25 * (1.0 + n2) * (1.0 + n2) - overlap));
}

inline double moment_bound_constant(double e, double m) {
  if (e < 0.0 || m < 0.0) throw Error(ErrorCode::InvalidArgument, "moments must be non-negative");
  return std::pow(8.0 * (e + m) / (e + 1.0), 0.25);
}

struct GadgetPlan {
  double epsilon = 0.0;
  std::size_t system_modes = 0;
  // Indexed [k][j] with j = 0 for the first applied addition.
  std::vector<std::vector<double>> xi;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::vector<std::vector<double>> c_constant;
  std::vector<std::vector<double>> k_constant;

  std::size_t auxiliary_count() const {
    std::size_t n = 0;
    for (const auto& row : xi) n += row.size();
    return n;
  }

  std::vector<double> flattened() const {
    std::vector<double> out;
    for (const auto& row : xi) out.insert(out.end(), row.begin(), row.end());
    return out;
  }

  /// Every xi set to the same value.
  static GadgetPlan uniform(const std::vector<ProjectorSpec>& specs, double value) {
    if (!(value > 0.0 && value <= kMaxXi)) throw Error(ErrorCode::InvalidArgument, "xi must lie in (0, 0.5]");
    GadgetPlan plan;
    plan.system_modes = specs.size();
    for (const auto& s : specs) plan.xi.emplace_back(static_cast<std::size_t>(s.rank()), value);
    return plan;
  }
};

/// Mean photon number and second moment of a single-mode state.
inline std::pair<double, double> photon_moments(const TruncatedState& state) {
  double e = 0.0;
  double m = 0.0;
  const double total = state.norm_squared();
  for (std::size_t n = 0; n < state.dimension(); ++n) {
    const double p = std::norm(state[n]) / total;
    e += p * static_cast<double>(n);
    m += p * static_cast<double>(n * n);
  }
  return {e, m};
}

/// Per-mode xi values from the descending recursion, so that each attenuated projector stays
/// within eps/(2m) of its exact counterpart.
inline GadgetPlan choose_xi(const std::vector<ProjectorSpec>& specs, double epsilon, std::size_t m,
                            int cutoff) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1)");
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "mode count must be positive");
  GadgetPlan plan;
  plan.epsilon = epsilon;
  plan.system_modes = m;
  const double md = static_cast<double>(m);
  for (const auto& spec : specs) {
    const int r = spec.rank();
    std::vector<double> e(static_cast<std::size_t>(r)), mm(static_cast<std::size_t>(r));
    std::vector<double> c(static_cast<std::size_t>(r)), k(static_cast<std::size_t>(r));
    std::vector<double> xi(static_cast<std::size_t>(r));
    if (r > 0) {
      const int working = adequate_projector_cutoff(spec, std::max(cutoff, r + kProjectorHeadroom));
      for (int j = 1; j <= r; ++j) {
        const auto chain = build_projector_state(spec.prefix(j), working);
        std::tie(e[j - 1], mm[j - 1]) = photon_moments(chain.state);
        c[j - 1] = moment_bound_constant(e[j - 1], mm[j - 1]);
      }
      for (int j = 1; j <= r; ++j) {
        double kj = c[j - 1];
        for (int i = j + 1; i <= r; ++i) kj *= 2.0 / (e[i - 2] + 1.0);
        k[j - 1] = kj;
      }
      for (int j = r; j >= 1; --j) {
        double later = 1.0;
        for (int i = j + 1; i <= r; ++i) later *= xi[i - 1] * xi[i - 1];
        const double inner = later / (static_cast<double>(r) * k[j - 1]);
        double value = epsilon * epsilon / (4.0 * md * md) * inner * inner;
        value = std::min(value, kMaxXi);
        if (!(value >= kMinXi)) {
          throw Error(ErrorCode::UnderflowRisk, "xi " + format_number(value) + " for addition " +
                                                    std::to_string(j) + " of rank " + std::to_string(r) +
                                                    "; relax epsilon");
        }
        xi[j - 1] = value;
      }
    }
    plan.xi.push_back(std::move(xi));
    plan.first_moment.push_back(std::move(e));
    plan.second_moment.push_back(std::move(mm));
    plan.c_constant.push_back(std::move(c));
    plan.k_constant.push_back(std::move(k));
  }
  return plan;
}

/// Attenuated chain D(b) a^+ (cosh xi)^{-n} D(-b) ... applied to S(zeta)|alpha>, divided by
/// the square root of the exact chain's normalization.
inline TruncatedState build_attenuated_projector(const ProjectorSpec& spec, const std::vector<double>& xi,
                                                 int cutoff) {
  if (xi.size() != spec.additions.size()) {
    throw Error(ErrorCode::PlanMismatch, "xi list length differs from projector rank");
  }
  if (spec.rank() == 0) return build_projector_state(spec, cutoff).state;
  const double normalization = build_projector_state(spec, cutoff).normalization;
  const int levels = detail::projector_working_levels(spec, cutoff);
  ComplexVector v = detail::squeezed_coherent(spec, levels);
  for (std::size_t j = 0; j < xi.size(); ++j) {
    const Complex beta = spec.additions[j];
    if (beta != Complex(0.0)) v = gate_matrix(GaussianGate::displacement(0, -beta), levels - 1) * v;
    const double ch = std::cosh(xi[j]);
    for (Eigen::Index n = 0; n < v.size(); ++n) v(n) *= std::pow(ch, -static_cast<double>(n));
    v = detail::raise(v);
    if (beta != Complex(0.0)) v = gate_matrix(GaussianGate::displacement(0, beta), levels - 1) * v;
  }
  v /= std::sqrt(normalization);
  return detail::crop_projector(v, cutoff, normalization, false).state;
}

}  // namespace stellar
