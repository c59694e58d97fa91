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

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "stellar/error.hpp"
#include "stellar/fock.hpp"
#include "stellar/numerics.hpp"

namespace stellar {

struct Displacement {
  Complex beta;
};
struct Squeeze {
  Complex zeta;
};
struct Phase {
  double theta;
};
struct BeamSplitter {
  double theta;
  double phi;
};
struct TwoModeSqueeze {
  Complex xi;
};

using GateParameters = std::variant<Displacement, Squeeze, Phase, BeamSplitter, TwoModeSqueeze>;

/// D(b) = exp(b a^+ - b* a); S(z) = exp[(z* a^2 - z a^+2)/2]; R(t) = exp(i t n);
/// BS(t, p) = exp(t(e^{ip} a1^+ a2 - e^{-ip} a1 a2^+)); TMS(x) = exp(x a^+ b^+ - x* a b).
struct GaussianGate {
  GateParameters params;
  std::vector<std::size_t> modes;

  static GaussianGate displacement(std::size_t mode, Complex beta) { return {Displacement{beta}, {mode}}; }
  static GaussianGate squeeze(std::size_t mode, Complex zeta) { return {Squeeze{zeta}, {mode}}; }
  static GaussianGate phase(std::size_t mode, double theta) { return {Phase{theta}, {mode}}; }
  static GaussianGate beamsplitter(std::size_t a, std::size_t b, double theta, double phi) {
    return {BeamSplitter{theta, phi}, {a, b}};
  }
  static GaussianGate two_mode_squeeze(std::size_t a, std::size_t b, Complex xi) {
    return {TwoModeSqueeze{xi}, {a, b}};
  }

  std::size_t arity() const {
    return std::holds_alternative<BeamSplitter>(params) || std::holds_alternative<TwoModeSqueeze>(params) ? 2 : 1;
  }

  std::string kind() const {
    return std::visit(
        [](const auto& p) -> std::string {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Displacement>) return "disp";
          else if constexpr (std::is_same_v<T, Squeeze>) return "sq";
          else if constexpr (std::is_same_v<T, Phase>) return "phase";
          else if constexpr (std::is_same_v<T, BeamSplitter>) return "bs";
          else return "tms";
        },
        params);
  }

  bool passive() const {
    return std::holds_alternative<Phase>(params) || std::holds_alternative<BeamSplitter>(params);
  }

  GaussianGate inverse() const {
    GaussianGate g = *this;
    std::visit(
        [](auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Displacement>) p.beta = -p.beta;
          else if constexpr (std::is_same_v<T, Squeeze>) p.zeta = -p.zeta;
          else if constexpr (std::is_same_v<T, Phase>) p.theta = -p.theta;
          else if constexpr (std::is_same_v<T, BeamSplitter>) p.theta = -p.theta;
          else p.xi = -p.xi;
        },
        g.params);
    return g;
  }
};

/// Gates in application order.
class GaussianCircuit {
 public:
  explicit GaussianCircuit(std::size_t modes = 0) : modes_(modes) {}

  std::size_t modes() const { return modes_; }
  const std::vector<GaussianGate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  GaussianCircuit& add(GaussianGate gate) {
    if (gate.modes.size() != gate.arity()) {
      throw Error(ErrorCode::InvalidArgument, "gate " + gate.kind() + " expects " +
                                                  std::to_string(gate.arity()) + " modes");
    }
    for (std::size_t i = 0; i < gate.modes.size(); ++i) {
      if (gate.modes[i] >= modes_) {
        throw Error(ErrorCode::DimensionMismatch, "gate mode " + std::to_string(gate.modes[i]) +
                                                      " outside " + std::to_string(modes_) + " modes");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (gate.modes[i] == gate.modes[j]) throw Error(ErrorCode::InvalidArgument, "repeated gate mode");
      }
    }
    gates_.push_back(std::move(gate));
    return *this;
  }

  GaussianCircuit& append(const GaussianCircuit& other) {
    if (other.modes_ > modes_) throw Error(ErrorCode::DimensionMismatch, "appended circuit is wider");
    for (const auto& g : other.gates_) add(g);
    return *this;
  }

  GaussianCircuit inverse() const {
    GaussianCircuit out(modes_);
    for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) out.gates_.push_back(it->inverse());
    return out;
  }

  /// Same gates on a wider register with mode k relabelled to mapping[k].
  GaussianCircuit relabelled(std::size_t total_modes, const std::vector<std::size_t>& mapping) const {
    if (mapping.size() != modes_) throw Error(ErrorCode::DimensionMismatch, "mode mapping length");
    GaussianCircuit out(total_modes);
    for (auto g : gates_) {
      for (auto& k : g.modes) k = mapping[k];
      out.add(std::move(g));
    }
    return out;
  }

  GaussianCircuit widened(std::size_t total_modes) const {
    std::vector<std::size_t> mapping(modes_);
    for (std::size_t k = 0; k < modes_; ++k) mapping[k] = k;
    return relabelled(total_modes, mapping);
  }

  bool passive() const {
    for (const auto& g : gates_) {
      if (!g.passive()) return false;
    }
    return true;
  }

 private:
  std::size_t modes_;
  std::vector<GaussianGate> gates_;
};

inline constexpr double kGateConvergence = 1e-14;
inline constexpr int kInitialGateBuffer = 4;
inline constexpr int kMaxGateBuffer = 1024;

namespace detail {

inline double max_abs_difference(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// exp(G) of a generator on `dim` levels, cropped to `keep` levels; buffer doubled until stable.
template <class Generator>
ComplexMatrix converged_exponential(int keep, Generator&& generator) {
  auto cropped = [&](int buffer) -> ComplexMatrix {
    const Eigen::MatrixXcd g = generator(keep + buffer);
    const Eigen::MatrixXcd e = g.exp();
    return e.topLeftCorner(keep, keep);
  };
  int buffer = kInitialGateBuffer;
  ComplexMatrix previous = cropped(buffer);
  while (buffer < kMaxGateBuffer) {
    buffer *= 2;
    ComplexMatrix current = cropped(buffer);
    if (max_abs_difference(current, previous) < kGateConvergence) return current;
    previous = std::move(current);
  }
  return previous;
}

inline Eigen::MatrixXcd displacement_generator(Complex beta, int dim) {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 0; n + 1 < dim; ++n) {
    const double s = std::sqrt(static_cast<double>(n + 1));
    g(n + 1, n) = beta * s;
    g(n, n + 1) = -std::conj(beta) * s;
  }
  return g;
}

inline Eigen::MatrixXcd squeeze_generator(Complex zeta, int dim) {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 0; n + 2 < dim; ++n) {
    const double s = std::sqrt(static_cast<double>((n + 1) * (n + 2)));
    g(n, n + 2) = 0.5 * std::conj(zeta) * s;
    g(n + 2, n) = -0.5 * zeta * s;
  }
  return g;
}

inline ComplexMatrix beamsplitter_matrix(const BeamSplitter& bs, int cutoff) {
  const int levels = cutoff + 1;
  ComplexMatrix u = ComplexMatrix::Zero(levels * levels, levels * levels);
  const Complex forward = bs.theta * std::polar(1.0, bs.phi);
  const Complex backward = -bs.theta * std::polar(1.0, -bs.phi);
  for (int total = 0; total <= 2 * cutoff; ++total) {
    // photon number is conserved, so each block is finite and exact
    const int size = total + 1;
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(size, size);
    for (int k = 0; k < total; ++k) {
      const double s = std::sqrt(static_cast<double>((k + 1) * (total - k)));
      g(k + 1, k) = forward * s;
      g(k, k + 1) = backward * s;
    }
    const Eigen::MatrixXcd e = g.exp();
    for (int r = 0; r < size; ++r) {
      if (r > cutoff || total - r > cutoff) continue;
      for (int c = 0; c < size; ++c) {
        if (c > cutoff || total - c > cutoff) continue;
        u(r * levels + (total - r), c * levels + (total - c)) = e(r, c);
      }
    }
  }
  return u;
}

inline ComplexMatrix two_mode_squeeze_matrix(const TwoModeSqueeze& tms, int cutoff) {
  const int levels = cutoff + 1;
  ComplexMatrix u = ComplexMatrix::Zero(levels * levels, levels * levels);
  for (int d = -cutoff; d <= cutoff; ++d) {
    // the difference of photon numbers is conserved
    const int p0 = std::max(d, 0);
    const int q0 = std::max(-d, 0);
    const int keep = cutoff - std::abs(d) + 1;
    auto generator = [&](int dim) {
      Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(dim, dim);
      for (int j = 0; j + 1 < dim; ++j) {
        const double s = std::sqrt(static_cast<double>((p0 + j + 1) * (q0 + j + 1)));
        g(j + 1, j) = tms.xi * s;
        g(j, j + 1) = -std::conj(tms.xi) * s;
      }
      return g;
    };
    const ComplexMatrix block = converged_exponential(keep, generator);
    for (int r = 0; r < keep; ++r) {
      for (int c = 0; c < keep; ++c) {
        u((p0 + r) * levels + (q0 + r), (p0 + c) * levels + (q0 + c)) = block(r, c);
      }
    }
  }
  return u;
}

}  // namespace detail

/// Matrix of the gate on the levels 0..cutoff of its modes (first listed mode most significant).
inline ComplexMatrix gate_matrix(const GaussianGate& gate, int cutoff) {
  if (cutoff < 1) throw Error(ErrorCode::CutoffTooSmall, "gate matrices need cutoff >= 1");
  const int levels = cutoff + 1;
  return std::visit(
      [&](const auto& p) -> ComplexMatrix {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Displacement>) {
          return detail::converged_exponential(
              levels, [&](int dim) { return detail::displacement_generator(p.beta, dim); });
        } else if constexpr (std::is_same_v<T, Squeeze>) {
          return detail::converged_exponential(
              levels, [&](int dim) { return detail::squeeze_generator(p.zeta, dim); });
        } else if constexpr (std::is_same_v<T, Phase>) {
          ComplexMatrix u = ComplexMatrix::Zero(levels, levels);
          for (int n = 0; n < levels; ++n) u(n, n) = std::polar(1.0, p.theta * n);
          return u;
        } else if constexpr (std::is_same_v<T, BeamSplitter>) {
          return detail::beamsplitter_matrix(p, cutoff);
        } else {
          return detail::two_mode_squeeze_matrix(p, cutoff);
        }
      },
      gate.params);
}

/// Applies the gates in order; norm lost across the cutoff is accumulated in truncation_loss.
inline TruncatedState apply(const GaussianCircuit& circuit, TruncatedState state) {
  if (circuit.modes() != state.modes()) {
    throw Error(ErrorCode::DimensionMismatch, "circuit has " + std::to_string(circuit.modes()) +
                                                  " modes, state has " + std::to_string(state.modes()));
  }
  for (const auto& gate : circuit.gates()) {
    const double before = state.norm_squared();
    apply_local(state, gate.modes, gate_matrix(gate, state.cutoff()));
    state.add_truncation_loss(before - state.norm_squared());
  }
  return state;
}

/// V with U a_j^+ U^+ = sum_i V_ij a_i^+, so that U|alpha> = |V alpha>.
inline ComplexMatrix passive_gate_matrix(const GaussianGate& gate, std::size_t modes) {
  ComplexMatrix v = ComplexMatrix::Identity(static_cast<Eigen::Index>(modes), static_cast<Eigen::Index>(modes));
  if (const auto* p = std::get_if<Phase>(&gate.params)) {
    v(gate.modes[0], gate.modes[0]) = std::polar(1.0, p->theta);
  } else if (const auto* b = std::get_if<BeamSplitter>(&gate.params)) {
    const auto i = static_cast<Eigen::Index>(gate.modes[0]);
    const auto j = static_cast<Eigen::Index>(gate.modes[1]);
    const double c = std::cos(b->theta);
    const double s = std::sin(b->theta);
    v(i, i) = c;
    v(i, j) = std::polar(s, b->phi);
    v(j, i) = -std::polar(s, -b->phi);
    v(j, j) = c;
  } else {
    throw Error(ErrorCode::InvalidArgument, "gate " + gate.kind() + " is not passive");
  }
  return v;
}

inline ComplexMatrix passive_matrix(const GaussianCircuit& circuit) {
  const auto m = static_cast<Eigen::Index>(circuit.modes());
  ComplexMatrix v = ComplexMatrix::Identity(m, m);
  for (const auto& g : circuit.gates()) v = passive_gate_matrix(g, circuit.modes()) * v;
  return v;
}

/// Beamsplitters and phases whose passive matrix equals the given unitary.
inline GaussianCircuit interferometer_circuit(const ComplexMatrix& unitary) {
  detail::require_square(unitary);
  const auto m = unitary.rows();
  const ComplexMatrix check = unitary.adjoint() * unitary - ComplexMatrix::Identity(m, m);
  if (m > 0 && check.cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorCode::InvalidArgument, "interferometer matrix is not unitary");
  }
  ComplexMatrix w = unitary;
  struct Rotation {
    Eigen::Index pivot, row;
    double theta, phi;
  };
  std::vector<Rotation> rotations;
  for (Eigen::Index c = 0; c + 1 < m; ++c) {
    for (Eigen::Index j = c + 1; j < m; ++j) {
      const Complex a = w(c, c);
      const Complex b = w(j, c);
      if (std::abs(b) == 0.0) continue;
      const double theta = std::atan2(std::abs(b), std::abs(a));
      const double phi = (std::abs(a) == 0.0 ? 0.0 : std::arg(a)) - std::arg(b);
      GaussianGate g = GaussianGate::beamsplitter(static_cast<std::size_t>(c), static_cast<std::size_t>(j), theta, phi);
      w = passive_gate_matrix(g, static_cast<std::size_t>(m)) * w;
      w(j, c) = 0.0;
      rotations.push_back({c, j, theta, phi});
    }
  }
  GaussianCircuit circuit(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) {
    const double angle = std::arg(w(k, k));
    if (angle != 0.0) circuit.add(GaussianGate::phase(static_cast<std::size_t>(k), angle));
  }
  for (auto it = rotations.rbegin(); it != rotations.rend(); ++it) {
    circuit.add(GaussianGate::beamsplitter(static_cast<std::size_t>(it->pivot),
                                           static_cast<std::size_t>(it->row), -it->theta, it->phi));
  }
  return circuit;
}

/// One detector eigenstate: normalized D(b_r) a^+ D(-b_r) ... D(b_1) a^+ D(-b_1) S(zeta)|alpha>.
struct ProjectorSpec {
  Complex squeeze{0.0};
  Complex coherent{0.0};
  std::vector<Complex> additions;

  int rank() const { return static_cast<int>(additions.size()); }

  ProjectorSpec prefix(int j) const {
    ProjectorSpec out = *this;
    out.additions.resize(static_cast<std::size_t>(j));
    return out;
  }
};

struct ProjectorState {
  TruncatedState state;
  double normalization = 1.0;
};

inline constexpr int kProjectorHeadroom = 8;
inline constexpr double kProjectorLeakTolerance = 1e-10;

namespace detail {

inline int projector_working_levels(const ProjectorSpec& spec, int cutoff) {
  return cutoff + spec.rank() + 4 * kProjectorHeadroom;
}

// S(zeta)|alpha> = D(g) S(zeta)|0> on `levels` levels, g = alpha cosh r - conj(alpha) e^{i theta} sinh r.
// Amplitudes follow from the annihilator cosh r (a - g) + e^{i theta} sinh r (a^+ - conj(g)).
inline ComplexVector squeezed_coherent(const ProjectorSpec& spec, int levels) {
  ComplexVector v(levels);
  if (spec.squeeze == Complex(0.0)) {
    const auto c = coherent_amplitudes(spec.coherent, levels - 1);
    for (int n = 0; n < levels; ++n) v(n) = c[static_cast<std::size_t>(n)];
    return v;
  }
  const double r = std::abs(spec.squeeze);
  const Complex phase = std::polar(1.0, std::arg(spec.squeeze));
  const double ch = std::cosh(r);
  const Complex es = phase * std::sinh(r);
  const Complex a = spec.coherent;
  const Complex g = a * ch - std::conj(a) * es;
  const Complex lead = g * ch + es * std::conj(g);
  v(0) = std::exp(-0.5 * std::norm(g) - 0.5 * phase * std::tanh(r) * std::conj(g) * std::conj(g)) / std::sqrt(ch);
  if (levels > 1) v(1) = lead * v(0) / ch;
  for (int n = 1; n + 1 < levels; ++n) {
    v(n + 1) = (lead * v(n) - es * std::sqrt(static_cast<double>(n)) * v(n - 1)) /
               (ch * std::sqrt(static_cast<double>(n + 1)));
  }
  return v;
}

inline ComplexVector raise(const ComplexVector& v) {
  ComplexVector out = ComplexVector::Zero(v.size());
  for (Eigen::Index n = 0; n + 1 < v.size(); ++n) out(n + 1) = std::sqrt(static_cast<double>(n + 1)) * v(n);
  return out;
}

inline ProjectorState crop_projector(const ComplexVector& full, int cutoff, double normalization,
                                     bool normalize) {
  const int levels = cutoff + 1;
  double kept = 0.0;
  for (int n = 0; n < levels; ++n) kept += std::norm(full(n));
  const double total = full.squaredNorm();
  if (total <= 0.0) throw Error(ErrorCode::NormalizationError, "projector state vanishes");
  if ((total - kept) / total > kProjectorLeakTolerance) {
    throw Error(ErrorCode::CutoffTooSmall, "projector state leaks " + format_number((total - kept) / total) +
                                               " beyond cutoff " + std::to_string(cutoff));
  }
  std::vector<Complex> amp(static_cast<std::size_t>(levels));
  const double scale = normalize ? 1.0 / std::sqrt(normalization) : 1.0;
  for (int n = 0; n < levels; ++n) amp[static_cast<std::size_t>(n)] = full(n) * scale;
  return {TruncatedState(1, cutoff, std::move(amp), normalize), normalization};
}

}  // namespace detail

/// Builds the normalized projector state and its squared pre-normalization norm.
inline ProjectorState build_projector_state(const ProjectorSpec& spec, int cutoff) {
  if (cutoff < spec.rank()) throw Error(ErrorCode::CutoffTooSmall, "cutoff below projector rank");
  const int levels = detail::projector_working_levels(spec, cutoff);
  ComplexVector v = detail::squeezed_coherent(spec, levels);
  for (Complex beta : spec.additions) {
    // D(b) a^+ D(-b) = a^+ - conj(b)
    v = detail::raise(v) - std::conj(beta) * v;
  }
  return detail::crop_projector(v, cutoff, v.squaredNorm(), true);
}

/// Smallest cutoff >= requested at which the projector state fits.
inline int adequate_projector_cutoff(const ProjectorSpec& spec, int requested) {
  int cutoff = std::max(requested, spec.rank() + kProjectorHeadroom);
  for (int attempt = 0; attempt < 32; ++attempt, cutoff += 4) {
    try {
      build_projector_state(spec, cutoff);
      return cutoff;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CutoffTooSmall) throw;
    }
  }
  throw Error(ErrorCode::CutoffTooSmall, "no adequate cutoff for projector state");
}

}  // namespace stellar
