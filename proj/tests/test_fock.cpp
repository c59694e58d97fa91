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

#include "stellar/fock.hpp"
#include "support/oracles.hpp"

namespace {

using stellar::Complex;
using stellar::CoreState;
using stellar::ErrorCode;
using stellar::FockIndex;

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

CoreState superposition(int a, int b) {
  const double s = 1.0 / std::sqrt(2.0);
  return CoreState(1, {{FockIndex({a}), s}, {FockIndex({b}), s}});
}

TEST(CoreState, ValidatesInput) {
  EXPECT_EQ(error_of([] { CoreState(2, {{FockIndex({1}), 1.0}}); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(error_of([] { CoreState(1, {{FockIndex({-1}), 1.0}}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_of([] { CoreState(1, {{FockIndex({0}), 1.1}}); }), ErrorCode::NormalizationError);
  EXPECT_EQ(error_of([] { CoreState(1, {{FockIndex({0}), 0.0}}); }), ErrorCode::NormalizationError);
  EXPECT_EQ(error_of([] { CoreState(0, {}); }), ErrorCode::InvalidArgument);
}

TEST(CoreState, SubnormalizedIsFlagged) {
  const CoreState s(1, {{FockIndex({1}), 0.5}});
  EXPECT_TRUE(s.subnormalized());
  EXPECT_FALSE(CoreState::fock({2}).subnormalized());
}

TEST(StellarFunction, Examples) {
  const Complex z(0.3, -0.8);
  EXPECT_EQ(stellar::stellar_function_eval(CoreState::vacuum(2), {z, z}), Complex(1.0));
  EXPECT_NEAR(std::abs(stellar::stellar_function_eval(CoreState::fock({1}), {z}) - z), 0.0, 1e-15);
  const Complex expected = (1.0 + z * z / std::sqrt(2.0)) / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(stellar::stellar_function_eval(superposition(0, 2), {z}) - expected), 0.0, 1e-15);
  EXPECT_EQ(error_of([&] { stellar::stellar_function_eval(CoreState::fock({1}), {z, z}); }),
            ErrorCode::DimensionMismatch);
}

TEST(Husimi, Examples) {
  EXPECT_NEAR(stellar::husimi_q(CoreState::vacuum(2), {0.0, 0.0}), 1.0 / (std::numbers::pi * std::numbers::pi), 1e-15);
  EXPECT_EQ(stellar::husimi_q(CoreState::fock({1}), {0.0}), 0.0);
  EXPECT_EQ(error_of([] { stellar::husimi_q(CoreState(1, {{FockIndex({1}), 0.5}}), {0.0}); }),
            ErrorCode::NormalizationError);
}

TEST(Husimi, SinglePhotonIntegratesToOne) {
  const double h = 0.02;
  double total = 0.0;
  for (double x = -6.0 + h / 2; x < 6.0; x += h)
    for (double y = -6.0 + h / 2; y < 6.0; y += h) total += stellar::husimi_q(CoreState::fock({1}), {Complex(x, y)});
  EXPECT_NEAR(total * h * h, 1.0, 1e-3);
}

TEST(Husimi, AgreesWithTruncatedOverlap) {
  stellar::Rng rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t m = 1 + trial % 2;
    const CoreState psi = oracle::random_core_state(m, 4, 4, rng);
    const auto dense = stellar::to_truncated(psi, 30);
    for (double x : {-1.0, 0.0, 0.7}) {
      for (double y : {-0.4, 0.5}) {
        std::vector<Complex> alpha(m, Complex(x, y));
        if (m == 2) alpha[1] = Complex(y, -x);
        const double q = stellar::husimi_q(psi, alpha);
        const double overlap =
            std::norm(stellar::inner_product(stellar::truncated_coherent(alpha, 30), dense)) /
            std::pow(std::numbers::pi, static_cast<double>(m));
        EXPECT_GE(q, 0.0);
        EXPECT_NEAR(q, overlap, 1e-9);
      }
    }
  }
}

TEST(StellarRank, Examples) {
  EXPECT_EQ(stellar::stellar_rank(CoreState::vacuum(3)), 0);
  EXPECT_EQ(stellar::stellar_rank(CoreState::fock({1, 1})), 2);
  EXPECT_EQ(stellar::stellar_rank(superposition(0, 3)), 3);
}

TEST(Tensor, Examples) {
  const CoreState vv = stellar::tensor(CoreState::vacuum(1), CoreState::vacuum(1));
  EXPECT_EQ(vv.modes(), 2u);
  EXPECT_EQ(stellar::stellar_rank(vv), 0);
  const CoreState ones = stellar::tensor(CoreState::fock({1}), CoreState::fock({1}));
  EXPECT_EQ(stellar::stellar_rank(ones), 2);
  EXPECT_EQ(ones.support_size(), 1u);
}

TEST(Tensor, SupportMultipliesAndRanksAdd) {
  const CoreState a(1, {{FockIndex({0}), 0.6}, {FockIndex({2}), 0.8}});
  const CoreState b = CoreState::normalized_from(2, {{FockIndex({0, 1}), 1.0}, {FockIndex({3, 0}), Complex(0, 1)}, {FockIndex({1, 1}), -1.0}});
  const CoreState t = stellar::tensor(a, b);
  EXPECT_EQ(t.support_size(), 6u);
  EXPECT_EQ(stellar::stellar_rank(t), 5);
  EXPECT_NEAR(std::abs(t.amplitude(FockIndex({2, 3, 0})) - 0.8 * b.amplitude(FockIndex({3, 0}))), 0.0, 1e-15);
}

TEST(Tensor, RankAdditivityProperty) {
  stellar::Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const CoreState a = oracle::random_core_state(1 + rng.below(2), 5, 3, rng);
    const CoreState b = oracle::random_core_state(1 + rng.below(2), 5, 3, rng);
    EXPECT_EQ(stellar::stellar_rank(stellar::tensor(a, b)), stellar::stellar_rank(a) + stellar::stellar_rank(b));
  }
}

TEST(Truncated, IndexEncodingIsRowMajorModeZeroFirst) {
  const stellar::TruncatedState s(3, 2);
  EXPECT_EQ(s.dimension(), 27u);
  EXPECT_EQ(s.index(std::vector<int>{1, 0, 0}), 9u);
  EXPECT_EQ(s.index(std::vector<int>{0, 1, 2}), 5u);
  EXPECT_EQ(s.occupations(23).occupations, (std::vector<int>{2, 1, 2}));
}

TEST(Truncated, FockStateConversion) {
  const auto s = stellar::to_truncated(CoreState::fock({1}), 3);
  ASSERT_EQ(s.dimension(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(s[i], Complex(i == 1 ? 1.0 : 0.0));
  EXPECT_EQ(error_of([] { stellar::to_truncated(CoreState::fock({4}), 3); }), ErrorCode::CutoffTooSmall);
}

TEST(Truncated, InnerProductAndCoherentOverlap) {
  stellar::Rng rng(2);
  const auto psi = oracle::random_truncated(2, 4, 3, rng);
  const Complex self = stellar::inner_product(psi, psi);
  EXPECT_NEAR(self.imag(), 0.0, 1e-15);
  EXPECT_GE(self.real(), 0.0);
  const auto coherent = stellar::truncated_coherent(Complex(0.5), 20);
  const auto vac = stellar::to_truncated(CoreState::vacuum(1), 20);
  EXPECT_NEAR(std::abs(stellar::inner_product(vac, coherent) - std::exp(-0.125)), 0.0, 1e-9);
  EXPECT_EQ(error_of([&] { stellar::inner_product(vac, psi); }), ErrorCode::DimensionMismatch);
}

TEST(Truncated, LeakageReportsTopLevelWeight) {
  stellar::TruncatedState s(2, 2);
  s[s.index(std::vector<int>{0, 0})] = std::sqrt(0.9);
  s[s.index(std::vector<int>{1, 2})] = std::sqrt(0.1);
  EXPECT_NEAR(s.leakage(), 0.1, 1e-15);
  EXPECT_NEAR(stellar::truncated_coherent(Complex(0.3), 25).leakage(), 0.0, 1e-30);
}

TEST(RankTruncate, Examples) {
  const auto one = stellar::rank_truncate(stellar::to_truncated(CoreState::fock({1}), 4), 1);
  EXPECT_EQ(one.core.support_size(), 1u);
  EXPECT_NEAR(std::abs(one.core.amplitude(FockIndex({1})) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(one.fidelity, 1.0, 1e-15);
  EXPECT_EQ(error_of([] { stellar::rank_truncate(stellar::to_truncated(CoreState::fock({2}), 4), 1); }),
            ErrorCode::ZeroProjection);
}

TEST(RankTruncate, CoherentStateTraceDistance) {
  const auto coherent = stellar::truncated_coherent(Complex(1.0), 20);
  const auto r = stellar::rank_truncate(coherent, 2);
  EXPECT_EQ(r.core.support_size(), 3u);
  double kept = 0.0;
  for (int n = 0; n <= 2; ++n) kept += std::exp(-1.0) / oracle::factorial(n);
  EXPECT_NEAR(r.trace_distance, std::sqrt(1.0 - kept), 1e-12);
}

TEST(RankTruncate, IdentityAtFullRank) {
  stellar::Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const CoreState psi = oracle::random_core_state(2, 4, 5, rng);
    const auto back = stellar::rank_truncate(stellar::to_truncated(psi, 6), stellar::stellar_rank(psi)).core;
    ASSERT_EQ(back.support_size(), psi.support_size());
    for (const auto& [index, amplitude] : psi.terms()) {
      EXPECT_NEAR(std::abs(back.amplitude(index) - amplitude), 0.0, 1e-12);
    }
  }
}

TEST(LocalOperations, AppendAndContractAreInverse) {
  stellar::Rng rng(6);
  const auto psi = oracle::random_truncated(2, 3, 3, rng);
  const auto extended = stellar::append_mode(psi, stellar::fock_vector(0, 3));
  EXPECT_EQ(extended.modes(), 3u);
  const auto back = stellar::contract_mode(extended, 2, stellar::fock_vector(0, 3));
  EXPECT_NEAR(stellar::distance(back, psi), 0.0, 1e-15);
  const auto other = stellar::contract_mode(extended, 2, stellar::fock_vector(1, 3));
  EXPECT_NEAR(other.norm_squared(), 0.0, 1e-30);
}

}  // namespace
