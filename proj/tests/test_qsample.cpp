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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "stellar/qsample.hpp"
#include "support/oracles.hpp"
#include "support/stats.hpp"

namespace {

using stellar::Complex;
using stellar::CoreState;
using stellar::ErrorCode;
using stellar::FockIndex;
using stellar::GaussianCircuit;
using stellar::GaussianGate;
using stellar::SeparableDecomposition;
using stellar::SeparableLabel;
using stellar::SingleModeState;

template <class F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const stellar::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

SeparableDecomposition single(const SingleModeState& s) {
  SeparableDecomposition d;
  d.labels.push_back({1.0, {s}});
  return d;
}

stellar::TruncatedState dense(const SingleModeState& s, int cutoff) {
  GaussianCircuit c(1);
  if (s.squeeze != Complex(0.0)) c.add(GaussianGate::squeeze(0, s.squeeze));
  if (s.displacement != Complex(0.0)) c.add(GaussianGate::displacement(0, s.displacement));
  return stellar::apply(c, stellar::to_truncated(s.core, cutoff));
}

std::vector<Complex> first_mode(const stellar::QSampleResult& r) {
  std::vector<Complex> out;
  for (const auto& s : r.samples) out.push_back(s[0]);
  return out;
}

TEST(SingleModeQ, MatchesHusimiForCoreStates) {
  stellar::Rng rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    SingleModeState s;
    s.core = oracle::random_core_state(1, 5, 3, rng);
    for (double x : {-1.2, 0.0, 0.4}) {
      const Complex a(x, 0.7 - x);
      EXPECT_NEAR(stellar::single_mode_q(s, a), stellar::husimi_q(s.core, {a}), 1e-13);
    }
  }
}

TEST(SingleModeQ, MatchesTruncatedOverlapForGaussianParts) {
  stellar::Rng rng(72);
  for (int trial = 0; trial < 5; ++trial) {
    SingleModeState s;
    s.core = oracle::random_core_state(1, 3, 3, rng);
    s.squeeze = oracle::random_complex(0.4, rng);
    s.displacement = oracle::random_complex(0.8, rng);
    const auto psi = dense(s, 50);
    for (double x : {-1.0, 0.3, 1.1}) {
      const Complex a(x, -0.5 * x + 0.2);
      const double expected = std::norm(stellar::inner_product(stellar::truncated_coherent(a, 50), psi)) / std::numbers::pi;
      EXPECT_NEAR(stellar::single_mode_q(s, a), expected, 1e-10);
    }
  }
}

TEST(QSample, VacuumMoments) {
  const auto r = stellar::sample_separable(single({}), 20000, 5);
  Complex mean = 0.0;
  double second = 0.0;
  for (Complex a : first_mode(r)) {
    mean += a;
    second += std::norm(a);
  }
  mean /= 20000.0;
  second /= 20000.0;
  EXPECT_LT(std::abs(mean), 0.03);
  EXPECT_NEAR(second, 1.0, 0.04);
}

TEST(QSample, DisplacedMean) {
  SingleModeState s;
  s.displacement = Complex(1.5, -0.5);
  const auto r = stellar::sample_separable(single(s), 20000, 6);
  Complex mean = 0.0;
  for (Complex a : first_mode(r)) mean += a;
  mean /= 20000.0;
  EXPECT_LT(std::abs(mean - s.displacement), 0.03);
}

TEST(QSample, SqueezedQuadratureVariances) {
  SingleModeState s;
  s.squeeze = 0.5;
  const auto samples = first_mode(stellar::sample_separable(single(s), 20000, 7));
  double vx = 0.0, vp = 0.0;
  for (Complex a : samples) {
    vx += a.real() * a.real();
    vp += a.imag() * a.imag();
  }
  vx /= 20000.0;
  vp /= 20000.0;
  EXPECT_NEAR(vx, (std::exp(-1.0) + 1.0) / 4.0, 0.05 * (std::exp(-1.0) + 1.0) / 4.0);
  EXPECT_NEAR(vp, (std::exp(1.0) + 1.0) / 4.0, 0.05 * (std::exp(1.0) + 1.0) / 4.0);
}

TEST(QSample, SinglePhotonRadialDistribution) {
  SingleModeState s;
  s.core = CoreState::fock({1});
  const auto samples = first_mode(stellar::sample_separable(single(s), 20000, 8));
  // |alpha|^2 is Gamma(2, 1) distributed
  const std::vector<double> edges = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 1e300};
  auto cdf = [](double t) { return t > 1e200 ? 1.0 : 1.0 - (1.0 + t) * std::exp(-t); };
  std::vector<double> observed(edges.size() - 1, 0.0), expected(edges.size() - 1);
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) expected[b] = 20000.0 * (cdf(edges[b + 1]) - cdf(edges[b]));
  for (Complex a : samples) {
    const double t = std::norm(a);
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
      if (t < edges[b + 1]) {
        observed[b] += 1.0;
        break;
      }
    }
  }
  EXPECT_GT(stats::chi_square_p_value(observed, expected), 1e-3);
}

TEST(QSample, MixtureWeights) {
  SeparableDecomposition d;
  SingleModeState far;
  far.displacement = 3.0;
  d.labels.push_back({0.3, {SingleModeState{}}});
  d.labels.push_back({0.7, {far}});
  const auto r = stellar::sample_separable(d, 20000, 9);
  double ones = 0.0;
  for (auto l : r.labels) ones += static_cast<double>(l);
  const double sd = std::sqrt(20000.0 * 0.3 * 0.7);
  EXPECT_NEAR(ones, 14000.0, 4.0 * sd);
  EXPECT_EQ(r.accepted, 20000u);
  EXPECT_GE(r.proposals, r.accepted);
}

TEST(QSample, ThreadCountDoesNotChangeOutput) {
  SeparableDecomposition d;
  SingleModeState a;
  a.core = CoreState::fock({2});
  a.squeeze = Complex(0.2, 0.1);
  d.labels.push_back({1.0, {a, SingleModeState{}}});
  const auto serial = stellar::sample_separable(d, 500, 10, 1);
  const auto threaded = stellar::sample_separable(d, 500, 10, 3);
  EXPECT_EQ(serial.samples, threaded.samples);
  EXPECT_EQ(serial.proposals, threaded.proposals);
  EXPECT_EQ(stellar::single_mode_q_sample(a, 3), stellar::single_mode_q_sample(a, 3));
}

TEST(QSample, SingleModeAgainstGridOracle) {
  SingleModeState s;
  s.core = CoreState::normalized_from(1, {{FockIndex({0}), 0.6}, {FockIndex({2}), Complex(0.0, 0.8)}});
  s.squeeze = Complex(0.3, -0.2);
  s.displacement = Complex(0.5, 0.4);
  const stats::GridOracle grid({{1.0, dense(s, 40)}}, 6.0, 0.1);
  EXPECT_NEAR(grid.total_mass(), 1.0, 1e-4);
  const auto x = stats::to_points(stellar::sample_separable(single(s), 2000, 11).samples);
  const auto y = stats::to_points(grid.sample(2000, 12));
  EXPECT_GT(stats::energy_test(x, y, 99, 13).p_value, 0.01);
}

TEST(QSample, RotatedProductAgainstGridOracle) {
  const double s = 1.0 / std::sqrt(2.0);
  SeparableDecomposition d;
  d.unitary = stellar::ComplexMatrix(2, 2);
  *d.unitary << s, s, -s, s;
  SingleModeState one;
  one.core = CoreState::fock({1});
  d.labels.push_back({1.0, {one, SingleModeState{}}});
  const auto product = stellar::to_truncated(CoreState::fock({1, 0}), 8);
  const auto rotated = stellar::apply(stellar::interferometer_circuit(*d.unitary).inverse(), product);
  const stats::GridOracle grid({{1.0, rotated}}, 5.0, 0.25);
  EXPECT_NEAR(grid.total_mass(), 1.0, 1e-3);
  const auto x = stats::to_points(stellar::sample_separable(d, 2000, 14).samples);
  const auto y = stats::to_points(grid.sample(2000, 15));
  EXPECT_GT(stats::energy_test(x, y, 99, 16).p_value, 0.01);
}

TEST(QSample, EnergyTestDetectsWrongBasis) {
  const double s = 1.0 / std::sqrt(2.0);
  SeparableDecomposition d;
  d.unitary = stellar::ComplexMatrix(2, 2);
  *d.unitary << s, s, -s, s;
  SingleModeState one;
  one.core = CoreState::fock({1});
  d.labels.push_back({1.0, {one, SingleModeState{}}});
  const stats::GridOracle grid({{1.0, stellar::to_truncated(CoreState::fock({1, 0}), 8)}}, 5.0, 0.25);
  const auto x = stats::to_points(stellar::sample_separable(d, 2000, 14).samples);
  const auto y = stats::to_points(grid.sample(2000, 15));
  EXPECT_LE(stats::energy_test(x, y, 99, 16).p_value, 0.01);
}

TEST(QSample, Validation) {
  SeparableDecomposition empty;
  EXPECT_EQ(error_of([&] { empty.validate(); }), ErrorCode::InvalidArgument);
  SeparableDecomposition bad_weight;
  bad_weight.labels.push_back({0.5, {SingleModeState{}}});
  EXPECT_EQ(error_of([&] { bad_weight.validate(); }), ErrorCode::NormalizationError);
  SeparableDecomposition ragged;
  ragged.labels.push_back({0.5, {SingleModeState{}}});
  ragged.labels.push_back({0.5, {SingleModeState{}, SingleModeState{}}});
  EXPECT_EQ(error_of([&] { ragged.validate(); }), ErrorCode::DimensionMismatch);
  SeparableDecomposition skew = single({});
  skew.unitary = stellar::ComplexMatrix::Constant(1, 1, Complex(2.0));
  EXPECT_EQ(error_of([&] { skew.validate(); }), ErrorCode::InvalidArgument);
  skew.unitary = stellar::ComplexMatrix::Identity(2, 2);
  EXPECT_EQ(error_of([&] { skew.validate(); }), ErrorCode::DimensionMismatch);
}

}  // namespace
