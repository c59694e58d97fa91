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
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "stellar/bargmann.hpp"
#include "stellar/error.hpp"
#include "stellar/fock.hpp"
#include "stellar/gaussian.hpp"
#include "stellar/random.hpp"

namespace stellar {

inline constexpr double kMinAcceptance = 1e-4;
inline constexpr double kEnvelopeSafety = 1.2;

/// D(displacement) S(squeeze) |core> on one mode.
struct SingleModeState {
  CoreState core = CoreState::vacuum(1);
  Complex squeeze{0.0};
  Complex displacement{0.0};
};

/// Q(alpha) = |<alpha|state>|^2 / pi.
inline double single_mode_q(const SingleModeState& state, Complex alpha) {
  GaussianPureState dual = GaussianPureState::coherent({alpha});
  if (state.displacement != Complex(0.0)) dual.apply(GaussianGate::displacement(0, -state.displacement));
  if (state.squeeze != Complex(0.0)) dual.apply(GaussianGate::squeeze(0, -state.squeeze));
  const Complex quad = dual.quadratic()(0, 0);
  const Complex lin = dual.linear()(0);
  const int rank = stellar_rank(state.core);
  // h_n = lhaf of n copies: h_n = b h_{n-1} + (n-1) B h_{n-2}
  std::vector<Complex> h(static_cast<std::size_t>(rank) + 1);
  h[0] = 1.0;
  if (rank >= 1) h[1] = lin;
  for (int n = 2; n <= rank; ++n) h[n] = lin * h[n - 1] + static_cast<double>(n - 1) * quad * h[n - 2];
  Complex sum = 0.0;
  for (const auto& [index, amplitude] : state.core.terms()) {
    sum += amplitude * std::conj(h[static_cast<std::size_t>(index[0])]) / sqrt_factorial(index[0]);
  }
  return dual.vacuum_probability() * std::norm(sum) / std::numbers::pi;
}

/// Rejection sampler from a single-mode Q function with a Gaussian envelope.
class SingleModeQSampler {
 public:
  explicit SingleModeQSampler(SingleModeState state) : state_(std::move(state)) {
    if (state_.core.modes() != 1) throw Error(ErrorCode::DimensionMismatch, "single-mode core state expected");
    if (std::abs(state_.core.norm_squared() - 1.0) > kTruncatedNormTolerance) {
      throw Error(ErrorCode::NormalizationError, "Q sampling needs a normalized state");
    }
    const double s = std::abs(state_.squeeze);
    const double half_angle = 0.5 * std::arg(state_.squeeze);
    const double inflation = 1.0 + stellar_rank(state_.core);
    const double narrow = inflation * (std::exp(-2.0 * s) + 1.0) / 4.0;
    const double wide = inflation * (std::exp(2.0 * s) + 1.0) / 4.0;
    axis_u_ = {std::cos(half_angle), std::sin(half_angle)};
    sd_u_ = std::sqrt(narrow);
    sd_v_ = std::sqrt(wide);
    double worst = 0.0;
    constexpr int kGrid = 160;
    constexpr double kSpan = 8.0;
    for (int a = 0; a <= kGrid; ++a) {
      for (int b = 0; b <= kGrid; ++b) {
        const double t = kSpan * (2.0 * a / kGrid - 1.0);
        const double w = kSpan * (2.0 * b / kGrid - 1.0);
        const Complex x = point(t, w);
        worst = std::max(worst, single_mode_q(state_, x) / envelope_density(t, w));
      }
    }
    bound_ = kEnvelopeSafety * worst;
    if (!(1.0 / bound_ >= kMinAcceptance)) {
      throw Error(ErrorCode::EnvelopeFailure, "expected acceptance " + format_number(1.0 / bound_));
    }
  }

  const SingleModeState& state() const { return state_; }
  double bound() const { return bound_; }
  double expected_acceptance() const { return 1.0 / bound_; }

  /// One sample; attempts counts envelope proposals.
  Complex draw(Rng& rng, std::uint64_t* attempts = nullptr) const {
    const std::uint64_t max_attempts = static_cast<std::uint64_t>(100.0 / kMinAcceptance);
    for (std::uint64_t k = 1; k <= max_attempts; ++k) {
      const double t = rng.normal();
      const double w = rng.normal();
      const double u = rng.uniform();
      const Complex x = point(t, w);
      if (u * bound_ * envelope_density(t, w) <= single_mode_q(state_, x)) {
        if (attempts) *attempts += k;
        return x;
      }
    }
    throw Error(ErrorCode::EnvelopeFailure, "no sample accepted");
  }

 private:
  // Point at standardized envelope coordinates (t, w).
  Complex point(double t, double w) const {
    const double du = sd_u_ * t;
    const double dv = sd_v_ * w;
    return state_.displacement + Complex(du * axis_u_[0] - dv * axis_u_[1], du * axis_u_[1] + dv * axis_u_[0]);
  }

  double envelope_density(double t, double w) const {
    return std::exp(-0.5 * (t * t + w * w)) / (2.0 * std::numbers::pi * sd_u_ * sd_v_);
  }

  SingleModeState state_;
  std::array<double, 2> axis_u_{1.0, 0.0};
  double sd_u_ = 1.0;
  double sd_v_ = 1.0;
  double bound_ = 1.0;
};

inline Complex single_mode_q_sample(const SingleModeState& state, std::uint64_t seed) {
  Rng rng(seed);
  return SingleModeQSampler(state).draw(rng);
}

struct SeparableLabel {
  double weight = 1.0;
  std::vector<SingleModeState> modes;
};

/// Mixture over labels of product states, optionally in a rotated passive basis.
struct SeparableDecomposition {
  std::vector<SeparableLabel> labels;
  std::optional<ComplexMatrix> unitary;

  std::size_t modes() const { return labels.empty() ? 0 : labels.front().modes.size(); }

  void validate() const {
    if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "decomposition has no labels");
    double total = 0.0;
    for (const auto& l : labels) {
      if (!(l.weight >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative label weight");
      if (l.modes.size() != modes() || l.modes.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "labels must share one positive mode count");
      }
      total += l.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::NormalizationError, "label weights sum to " + format_number(total));
    if (unitary) {
      const auto n = static_cast<Eigen::Index>(modes());
      if (unitary->rows() != n || unitary->cols() != n) throw Error(ErrorCode::DimensionMismatch, "unitary size");
      const ComplexMatrix check = unitary->adjoint() * *unitary - ComplexMatrix::Identity(n, n);
      if (check.cwiseAbs().maxCoeff() > 1e-10) throw Error(ErrorCode::InvalidArgument, "matrix is not unitary");
    }
  }
};

struct QSampleResult {
  std::vector<std::vector<Complex>> samples;
  std::vector<std::size_t> labels;
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;

  double acceptance_rate() const { return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals); }
};

/// Sample i uses stream i of the master seed, so output is independent of the thread count.
inline QSampleResult sample_separable(const SeparableDecomposition& dec, std::size_t n_samples, std::uint64_t seed,
                                      unsigned threads = 1) {
  dec.validate();
  std::vector<std::vector<SingleModeQSampler>> samplers;
  std::vector<double> cumulative;
  double running = 0.0;
  for (const auto& l : dec.labels) {
    std::vector<SingleModeQSampler> row;
    for (const auto& s : l.modes) row.emplace_back(s);
    samplers.push_back(std::move(row));
    running += l.weight;
    cumulative.push_back(running);
  }
  const std::size_t n = dec.modes();
  QSampleResult out;
  out.samples.assign(n_samples, std::vector<Complex>(n));
  out.labels.assign(n_samples, 0);
  std::vector<std::uint64_t> attempts(n_samples, 0);
  auto work = [&](std::size_t begin, std::size_t end) {
    ComplexVector beta(static_cast<Eigen::Index>(n));
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = Rng::stream(seed, i);
      const double u = rng.uniform() * running;
      std::size_t label = 0;
      while (label + 1 < cumulative.size() && u >= cumulative[label]) ++label;
      out.labels[i] = label;
      for (std::size_t k = 0; k < n; ++k) beta(static_cast<Eigen::Index>(k)) = samplers[label][k].draw(rng, &attempts[i]);
      if (dec.unitary) {
        const ComplexVector alpha = dec.unitary->adjoint() * beta;
        for (std::size_t k = 0; k < n; ++k) out.samples[i][k] = alpha(static_cast<Eigen::Index>(k));
      } else {
        for (std::size_t k = 0; k < n; ++k) out.samples[i][k] = beta(static_cast<Eigen::Index>(k));
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, n_samples));
  if (workers <= 1) {
    work(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_samples + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n_samples, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  for (auto a : attempts) out.proposals += a;
  out.accepted = static_cast<std::uint64_t>(n_samples) * n;
  return out;
}

}  // namespace stellar
