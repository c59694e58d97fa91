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

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <vector>

#include "stellar/error.hpp"
#include "stellar/fock.hpp"
#include "stellar/gaussian.hpp"
#include "stellar/numerics.hpp"

namespace stellar {

/// Pure Gaussian state in Bargmann form, <z*|G> = c0 exp(z^T B z / 2 + b^T z).
/// The global phase of c0 is not tracked; amplitudes share one common phase.
class GaussianPureState {
 public:
  explicit GaussianPureState(std::size_t modes)
      : b_matrix_(ComplexMatrix::Zero(static_cast<Eigen::Index>(modes), static_cast<Eigen::Index>(modes))),
        b_vector_(ComplexVector::Zero(static_cast<Eigen::Index>(modes))) {}

  static GaussianPureState vacuum(std::size_t modes) { return GaussianPureState(modes); }

  static GaussianPureState coherent(const std::vector<Complex>& alpha) {
    GaussianPureState s(alpha.size());
    for (std::size_t k = 0; k < alpha.size(); ++k) s.b_vector_(static_cast<Eigen::Index>(k)) = alpha[k];
    return s;
  }

  std::size_t modes() const { return static_cast<std::size_t>(b_vector_.size()); }
  const ComplexMatrix& quadratic() const { return b_matrix_; }
  const ComplexVector& linear() const { return b_vector_; }

  /// Conjugates by the gate: with U a U^+ = P a + Q a^+ + d on the gate modes,
  /// B' = L^{-1}(B P* - Q), b' = L^{-1}(b + B d* - d), L = P - B Q*.
  GaussianPureState& apply(const GaussianGate& gate) {
    const auto m = static_cast<Eigen::Index>(modes());
    for (auto k : gate.modes) {
      if (k >= modes()) throw Error(ErrorCode::DimensionMismatch, "gate mode out of range");
    }
    ComplexMatrix p = ComplexMatrix::Identity(m, m);
    ComplexMatrix q = ComplexMatrix::Zero(m, m);
    ComplexVector d = ComplexVector::Zero(m);
    const auto i = static_cast<Eigen::Index>(gate.modes[0]);
    if (const auto* g = std::get_if<Displacement>(&gate.params)) {
      d(i) = -g->beta;
    } else if (const auto* g = std::get_if<Squeeze>(&gate.params)) {
      const double r = std::abs(g->zeta);
      p(i, i) = std::cosh(r);
      q(i, i) = std::polar(std::sinh(r), std::arg(g->zeta));
    } else if (const auto* g = std::get_if<Phase>(&gate.params)) {
      p(i, i) = std::polar(1.0, -g->theta);
    } else if (std::holds_alternative<BeamSplitter>(gate.params)) {
      const auto j = static_cast<Eigen::Index>(gate.modes[1]);
      const ComplexMatrix v = passive_gate_matrix(gate, modes()).adjoint();
      p(i, i) = v(i, i);
      p(i, j) = v(i, j);
      p(j, i) = v(j, i);
      p(j, j) = v(j, j);
    } else if (const auto* g = std::get_if<TwoModeSqueeze>(&gate.params)) {
      const auto j = static_cast<Eigen::Index>(gate.modes[1]);
      const double r = std::abs(g->xi);
      const Complex s = std::polar(std::sinh(r), std::arg(g->xi));
      p(i, i) = std::cosh(r);
      p(j, j) = std::cosh(r);
      q(i, j) = -s;
      q(j, i) = -s;
    }
    const ComplexMatrix l = p - b_matrix_ * q.conjugate();
    const Eigen::PartialPivLU<ComplexMatrix> lu(l);
    ComplexMatrix next = lu.solve(b_matrix_ * p.conjugate() - q);
    b_vector_ = lu.solve(b_vector_ + b_matrix_ * d.conjugate() - d);
    b_matrix_ = 0.5 * (next + next.transpose());
    return *this;
  }

  GaussianPureState& apply(const GaussianCircuit& circuit) {
    if (circuit.modes() != modes()) throw Error(ErrorCode::DimensionMismatch, "circuit width");
    for (const auto& g : circuit.gates()) apply(g);
    return *this;
  }

  /// log |<0|G>|^2 from the Gaussian normalization integral.
  double log_vacuum_probability() const {
    const auto m = b_vector_.size();
    const Eigen::MatrixXd re = b_matrix_.real();
    const Eigen::MatrixXd im = b_matrix_.imag();
    Eigen::MatrixXd h(2 * m, 2 * m);
    h.topLeftCorner(m, m) = 2.0 * Eigen::MatrixXd::Identity(m, m) - 2.0 * re;
    h.topRightCorner(m, m) = 2.0 * im;
    h.bottomLeftCorner(m, m) = 2.0 * im;
    h.bottomRightCorner(m, m) = 2.0 * Eigen::MatrixXd::Identity(m, m) + 2.0 * re;
    Eigen::VectorXd g(2 * m);
    g.head(m) = 2.0 * b_vector_.real();
    g.tail(m) = -2.0 * b_vector_.imag();
    const Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::NormalizationError, "Gaussian state is not normalizable");
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index k = 0; k < 2 * m; ++k) log_det += 2.0 * std::log(lower(k, k));
    const double exponent = 0.5 * g.dot(llt.solve(g));
    const double log_integral = static_cast<double>(m) * std::numbers::ln2 - 0.5 * log_det + exponent;
    return -log_integral;
  }

  double vacuum_probability() const { return std::exp(log_vacuum_probability()); }

  /// Matrix whose loop hafnian gives the n-th Taylor coefficient times n!; each copy of mode k
  /// is a vertex, and vertex i is reweighted by weights[mode(i)].
  ComplexMatrix filled_matrix(const FockIndex& n, const std::vector<double>& weights = {}) const {
    if (n.modes() != modes()) throw Error(ErrorCode::DimensionMismatch, "occupation tuple length");
    std::vector<Eigen::Index> vertex_mode;
    for (std::size_t k = 0; k < modes(); ++k) {
      for (int c = 0; c < n[k]; ++c) vertex_mode.push_back(static_cast<Eigen::Index>(k));
    }
    const auto dim = static_cast<Eigen::Index>(vertex_mode.size());
    ComplexMatrix a(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      const double wr = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(vertex_mode[r])];
      for (Eigen::Index c = 0; c < dim; ++c) {
        const double wc = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(vertex_mode[c])];
        a(r, c) = r == c ? wr * b_vector_(vertex_mode[r]) : wr * wc * b_matrix_(vertex_mode[r], vertex_mode[c]);
      }
    }
    return a;
  }

  /// <n|G> / c0.
  Complex relative_amplitude(const FockIndex& n, const std::vector<double>& weights = {}) const {
    return loop_hafnian(filled_matrix(n, weights)) / n.sqrt_factorial();
  }

  double probability(const FockIndex& n) const {
    return vacuum_probability() * std::norm(relative_amplitude(n));
  }

 private:
  ComplexMatrix b_matrix_;
  ComplexVector b_vector_;
};

}  // namespace stellar
