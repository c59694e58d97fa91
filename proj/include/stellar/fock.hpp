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
#include <compare>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "stellar/error.hpp"
#include "stellar/numerics.hpp"

namespace stellar {

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kTruncatedNormTolerance = 1e-9;

inline double sqrt_factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= std::sqrt(static_cast<double>(i));
  return r;
}

struct FockIndex {
  std::vector<int> occupations;

  FockIndex() = default;
  explicit FockIndex(std::vector<int> n) : occupations(std::move(n)) {}

  std::size_t modes() const { return occupations.size(); }
  int total() const { return std::accumulate(occupations.begin(), occupations.end(), 0); }
  int operator[](std::size_t k) const { return occupations[k]; }

  double sqrt_factorial() const {
    double r = 1.0;
    for (int n : occupations) r *= stellar::sqrt_factorial(n);
    return r;
  }

  auto operator<=>(const FockIndex&) const = default;
};

/// Finite superposition of multimode Fock states.
class CoreState {
 public:
  using Terms = std::map<FockIndex, Complex>;

  CoreState() : modes_(1), terms_{{FockIndex({0}), Complex(1.0)}} {}

  CoreState(std::size_t modes, Terms terms) : modes_(modes) {
    if (modes_ == 0) throw Error(ErrorCode::InvalidArgument, "core state needs at least one mode");
    for (auto& [index, amplitude] : terms) {
      if (index.modes() != modes_) {
        throw Error(ErrorCode::DimensionMismatch, "occupation tuple of length " +
                                                      std::to_string(index.modes()) + " for " +
                                                      std::to_string(modes_) + " modes");
      }
      for (int n : index.occupations) {
        if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative occupation");
      }
      if (amplitude != Complex(0.0)) terms_.emplace(index, amplitude);
    }
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw Error(ErrorCode::NormalizationError, "core state has zero norm");
    if (n2 > 1.0 + kNormTolerance) {
      throw Error(ErrorCode::NormalizationError, "norm squared " + std::to_string(n2) + " exceeds 1");
    }
  }

  static CoreState vacuum(std::size_t modes) {
    return CoreState(modes, {{FockIndex(std::vector<int>(modes, 0)), Complex(1.0)}});
  }

  static CoreState fock(std::vector<int> occupations) {
    const std::size_t m = occupations.size();
    return CoreState(m, {{FockIndex(std::move(occupations)), Complex(1.0)}});
  }

  /// Rescales the given amplitudes to unit norm.
  static CoreState normalized_from(std::size_t modes, Terms terms) {
    double n2 = 0.0;
    for (const auto& [index, amplitude] : terms) n2 += std::norm(amplitude);
    if (!(n2 > 0.0)) throw Error(ErrorCode::NormalizationError, "core state has zero norm");
    const double scale = 1.0 / std::sqrt(n2);
    for (auto& [index, amplitude] : terms) amplitude *= scale;
    return CoreState(modes, std::move(terms));
  }

  std::size_t modes() const { return modes_; }
  const Terms& terms() const { return terms_; }
  std::size_t support_size() const { return terms_.size(); }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& [index, amplitude] : terms_) s += std::norm(amplitude);
    return s;
  }

  bool subnormalized() const { return norm_squared() < 1.0 - kNormTolerance; }

  Complex amplitude(const FockIndex& n) const {
    auto it = terms_.find(n);
    return it == terms_.end() ? Complex(0.0) : it->second;
  }

 private:
  std::size_t modes_;
  Terms terms_;
};

inline int stellar_rank(const CoreState& state) {
  int rank = 0;
  for (const auto& [index, amplitude] : state.terms()) rank = std::max(rank, index.total());
  return rank;
}

/// F(z) = sum_n psi_n z^n / sqrt(n!).
inline Complex stellar_function_eval(const CoreState& state, const std::vector<Complex>& z) {
  if (z.size() != state.modes()) {
    throw Error(ErrorCode::DimensionMismatch, "argument has " + std::to_string(z.size()) +
                                                  " entries for " + std::to_string(state.modes()) +
                                                  " modes");
  }
  Complex total = 0.0;
  for (const auto& [index, amplitude] : state.terms()) {
    Complex monomial = 1.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
      for (int p = 0; p < index[k]; ++p) monomial *= z[k];
    }
    total += amplitude * monomial / index.sqrt_factorial();
  }
  return total;
}

/// Husimi Q density normalized to one under d^2m alpha.
inline double husimi_q(const CoreState& state, const std::vector<Complex>& alpha) {
  if (std::abs(state.norm_squared() - 1.0) > kTruncatedNormTolerance) {
    throw Error(ErrorCode::NormalizationError, "Q function requires a normalized state");
  }
  std::vector<Complex> conj_alpha(alpha.size());
  double norm2 = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    conj_alpha[k] = std::conj(alpha[k]);
    norm2 += std::norm(alpha[k]);
  }
  const Complex f = stellar_function_eval(state, conj_alpha);
  return std::exp(-norm2) * std::norm(f) /
         std::pow(std::numbers::pi, static_cast<double>(alpha.size()));
}

inline CoreState tensor(const CoreState& a, const CoreState& b) {
  CoreState::Terms terms;
  for (const auto& [ia, ca] : a.terms()) {
    for (const auto& [ib, cb] : b.terms()) {
      std::vector<int> n = ia.occupations;
      n.insert(n.end(), ib.occupations.begin(), ib.occupations.end());
      terms.emplace(FockIndex(std::move(n)), ca * cb);
    }
  }
  return CoreState(a.modes() + b.modes(), std::move(terms));
}

/// Dense amplitudes over a per-mode cutoff; mode 0 is the most significant digit.
class TruncatedState {
 public:
  TruncatedState() : TruncatedState(0, 0) {}

  TruncatedState(std::size_t modes, int cutoff, bool normalized = false)
      : modes_(modes), cutoff_(cutoff), normalized_(normalized) {
    if (cutoff < 0) throw Error(ErrorCode::InvalidArgument, "negative cutoff");
    amplitudes_.assign(dimension_for(modes, cutoff), Complex(0.0));
  }

  TruncatedState(std::size_t modes, int cutoff, std::vector<Complex> amplitudes, bool normalized)
      : modes_(modes), cutoff_(cutoff), amplitudes_(std::move(amplitudes)), normalized_(normalized) {
    if (cutoff < 0) throw Error(ErrorCode::InvalidArgument, "negative cutoff");
    if (amplitudes_.size() != dimension_for(modes, cutoff)) {
      throw Error(ErrorCode::DimensionMismatch, "amplitude array has wrong size");
    }
    if (normalized_ && norm_squared() > 1.0 + kTruncatedNormTolerance) {
      throw Error(ErrorCode::NormalizationError, "state flagged normalized has norm above 1");
    }
  }

  static std::size_t dimension_for(std::size_t modes, int cutoff) {
    std::size_t d = 1;
    for (std::size_t k = 0; k < modes; ++k) d *= static_cast<std::size_t>(cutoff + 1);
    return d;
  }

  static TruncatedState vacuum(std::size_t modes, int cutoff) {
    TruncatedState s(modes, cutoff, true);
    s.amplitudes_[0] = 1.0;
    return s;
  }

  std::size_t modes() const { return modes_; }
  int cutoff() const { return cutoff_; }
  std::size_t levels() const { return static_cast<std::size_t>(cutoff_) + 1; }
  std::size_t dimension() const { return amplitudes_.size(); }
  bool normalized() const { return normalized_; }
  void set_normalized(bool flag) { normalized_ = flag; }

  const std::vector<Complex>& amplitudes() const { return amplitudes_; }
  std::vector<Complex>& amplitudes() { return amplitudes_; }
  Complex& operator[](std::size_t i) { return amplitudes_[i]; }
  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }

  std::size_t stride(std::size_t mode) const {
    std::size_t s = 1;
    for (std::size_t k = mode + 1; k < modes_; ++k) s *= levels();
    return s;
  }

  std::size_t index(const std::vector<int>& n) const {
    if (n.size() != modes_) throw Error(ErrorCode::DimensionMismatch, "occupation tuple length");
    std::size_t idx = 0;
    for (int v : n) {
      if (v < 0 || v > cutoff_) throw Error(ErrorCode::CutoffTooSmall, "occupation beyond cutoff");
      idx = idx * levels() + static_cast<std::size_t>(v);
    }
    return idx;
  }

  std::size_t index(const FockIndex& n) const { return index(n.occupations); }

  FockIndex occupations(std::size_t idx) const {
    std::vector<int> n(modes_, 0);
    for (std::size_t k = modes_; k-- > 0;) {
      n[k] = static_cast<int>(idx % levels());
      idx /= levels();
    }
    return FockIndex(std::move(n));
  }

  Complex at(const FockIndex& n) const { return amplitudes_[index(n)]; }
  Complex at(const std::vector<int>& n) const { return amplitudes_[index(n)]; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amplitudes_) s += std::norm(a);
    return s;
  }

  /// Weight carried by basis states with some mode at the top level.
  double leakage() const {
    double s = 0.0;
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
      std::size_t idx = i;
      for (std::size_t k = 0; k < modes_; ++k) {
        if (idx % levels() == static_cast<std::size_t>(cutoff_)) {
          s += std::norm(amplitudes_[i]);
          break;
        }
        idx /= levels();
      }
    }
    return s;
  }

  /// Norm lost by cropped gate applications so far.
  double truncation_loss() const { return truncation_loss_; }
  void add_truncation_loss(double loss) { truncation_loss_ += std::max(0.0, loss); }

  TruncatedState& operator*=(Complex c) {
    for (auto& a : amplitudes_) a *= c;
    return *this;
  }

 private:
  std::size_t modes_;
  int cutoff_;
  std::vector<Complex> amplitudes_;
  bool normalized_ = false;
  double truncation_loss_ = 0.0;
};

inline TruncatedState to_truncated(const CoreState& state, int cutoff) {
  for (const auto& [index, amplitude] : state.terms()) {
    for (int n : index.occupations) {
      if (n > cutoff) {
        throw Error(ErrorCode::CutoffTooSmall,
                    "occupation " + std::to_string(n) + " above cutoff " + std::to_string(cutoff));
      }
    }
  }
  TruncatedState out(state.modes(), cutoff, false);
  for (const auto& [index, amplitude] : state.terms()) out[out.index(index)] = amplitude;
  out.set_normalized(std::abs(state.norm_squared() - 1.0) <= kNormTolerance);
  return out;
}

inline void require_same_shape(const TruncatedState& a, const TruncatedState& b) {
  if (a.modes() != b.modes() || a.cutoff() != b.cutoff()) {
    throw Error(ErrorCode::DimensionMismatch, "truncated states differ in modes or cutoff");
  }
}

/// <a|b>, conjugate-linear in a.
inline Complex inner_product(const TruncatedState& a, const TruncatedState& b) {
  require_same_shape(a, b);
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double distance(const TruncatedState& a, const TruncatedState& b) {
  require_same_shape(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

/// Coherent-state amplitudes e^{-|a|^2/2} a^n / sqrt(n!) for n = 0..cutoff.
inline std::vector<Complex> coherent_amplitudes(Complex alpha, int cutoff) {
  std::vector<Complex> c(static_cast<std::size_t>(cutoff) + 1);
  c[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n <= cutoff; ++n) c[n] = c[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

inline TruncatedState truncated_coherent(const std::vector<Complex>& alpha, int cutoff) {
  TruncatedState out(alpha.size(), cutoff, false);
  std::vector<std::vector<Complex>> per_mode;
  for (Complex a : alpha) per_mode.push_back(coherent_amplitudes(a, cutoff));
  for (std::size_t i = 0; i < out.dimension(); ++i) {
    std::size_t idx = i;
    Complex v = 1.0;
    for (std::size_t k = alpha.size(); k-- > 0;) {
      v *= per_mode[k][idx % out.levels()];
      idx /= out.levels();
    }
    out[i] = v;
  }
  out.set_normalized(true);
  return out;
}

inline TruncatedState truncated_coherent(Complex alpha, int cutoff) {
  return truncated_coherent(std::vector<Complex>{alpha}, cutoff);
}

struct RankTruncation {
  CoreState core;
  double fidelity = 0.0;
  double trace_distance = 0.0;
};

/// Projects onto total photon number <= k and renormalizes.
inline RankTruncation rank_truncate(const TruncatedState& state, int k, double drop_below = 0.0) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "negative rank budget");
  CoreState::Terms terms;
  double kept = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    if (state[i] == Complex(0.0) || std::abs(state[i]) <= drop_below) continue;
    FockIndex n = state.occupations(i);
    if (n.total() > k) continue;
    kept += std::norm(state[i]);
    terms.emplace(std::move(n), state[i]);
  }
  const double total = state.norm_squared();
  if (terms.empty() || !(kept > 0.0)) {
    throw Error(ErrorCode::ZeroProjection, "no support with total photon number <= " + std::to_string(k));
  }
  const double scale = 1.0 / std::sqrt(kept);
  for (auto& [index, amplitude] : terms) amplitude *= scale;
  RankTruncation out{CoreState(state.modes(), std::move(terms)), 0.0, 0.0};
  out.fidelity = std::sqrt(kept);
  out.trace_distance = std::sqrt(std::max(0.0, 1.0 - kept / total));
  return out;
}

/// Applies a matrix acting on the listed modes; the first listed mode is the most significant
/// local digit.
inline void apply_local(TruncatedState& state, const std::vector<std::size_t>& modes,
                        const ComplexMatrix& u) {
  const std::size_t levels = state.levels();
  std::size_t local_dim = 1;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (modes[k] >= state.modes()) throw Error(ErrorCode::DimensionMismatch, "mode out of range");
    local_dim *= levels;
  }
  if (static_cast<std::size_t>(u.rows()) != local_dim || u.rows() != u.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "local operator has wrong size");
  }
  std::vector<std::size_t> offsets(local_dim, 0);
  for (std::size_t l = 0; l < local_dim; ++l) {
    std::size_t rem = l;
    std::size_t off = 0;
    for (std::size_t k = modes.size(); k-- > 0;) {
      off += (rem % levels) * state.stride(modes[k]);
      rem /= levels;
    }
    offsets[l] = off;
  }
  std::vector<bool> is_target(state.modes(), false);
  for (auto k : modes) is_target[k] = true;
  ComplexVector in(static_cast<Eigen::Index>(local_dim));
  ComplexVector out(static_cast<Eigen::Index>(local_dim));
  auto& amp = state.amplitudes();
  for (std::size_t base = 0; base < state.dimension(); ++base) {
    std::size_t idx = base;
    bool anchor = true;
    for (std::size_t k = state.modes(); k-- > 0;) {
      if (is_target[k] && idx % levels != 0) {
        anchor = false;
        break;
      }
      idx /= levels;
    }
    if (!anchor) continue;
    for (std::size_t l = 0; l < local_dim; ++l) in(static_cast<Eigen::Index>(l)) = amp[base + offsets[l]];
    out.noalias() = u * in;
    for (std::size_t l = 0; l < local_dim; ++l) amp[base + offsets[l]] = out(static_cast<Eigen::Index>(l));
  }
}

/// Appends a mode in the given single-mode state as the last (least significant) mode.
inline TruncatedState append_mode(const TruncatedState& state, const std::vector<Complex>& mode_state) {
  if (mode_state.size() != state.levels()) {
    throw Error(ErrorCode::DimensionMismatch, "single-mode vector length");
  }
  TruncatedState out(state.modes() + 1, state.cutoff(), false);
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    for (std::size_t n = 0; n < mode_state.size(); ++n) {
      out[i * state.levels() + n] = state[i] * mode_state[n];
    }
  }
  out.add_truncation_loss(state.truncation_loss());
  return out;
}

/// (<v| on `mode`) |state>, removing that mode.
inline TruncatedState contract_mode(const TruncatedState& state, std::size_t mode,
                                    const std::vector<Complex>& v) {
  if (mode >= state.modes()) throw Error(ErrorCode::DimensionMismatch, "mode out of range");
  if (v.size() != state.levels()) throw Error(ErrorCode::DimensionMismatch, "single-mode vector length");
  TruncatedState out(state.modes() - 1, state.cutoff(), false);
  const std::size_t inner = state.stride(mode);
  const std::size_t levels = state.levels();
  for (std::size_t j = 0; j < out.dimension(); ++j) {
    const std::size_t hi = j / inner;
    const std::size_t lo = j % inner;
    Complex s = 0.0;
    for (std::size_t n = 0; n < levels; ++n) {
      s += std::conj(v[n]) * state[(hi * levels + n) * inner + lo];
    }
    out[j] = s;
  }
  out.add_truncation_loss(state.truncation_loss());
  return out;
}

inline std::vector<Complex> fock_vector(int n, int cutoff) {
  std::vector<Complex> v(static_cast<std::size_t>(cutoff) + 1, Complex(0.0));
  if (n > cutoff) throw Error(ErrorCode::CutoffTooSmall, "Fock level above cutoff");
  v[static_cast<std::size_t>(n)] = 1.0;
  return v;
}

}  // namespace stellar
