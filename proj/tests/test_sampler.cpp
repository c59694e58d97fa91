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

#include "stellar/sampler.hpp"
#include "stellar/sweep.hpp"
#include "support/oracles.hpp"

namespace {

using stellar::Complex;
using stellar::CoreState;
using stellar::ErrorCode;
using stellar::GadgetPlan;
using stellar::GaussianCircuit;
using stellar::GaussianGate;
using stellar::OutcomeSpec;
using stellar::ProjectorSpec;
using stellar::SystemInput;

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

SystemInput hom_input() {
  GaussianCircuit bs(2);
  bs.add(GaussianGate::beamsplitter(0, 1, std::numbers::pi / 4, 0.0));
  return SystemInput(CoreState::fock({1, 1}), bs);
}

double fock_ratio(double xi) { return std::sinh(xi) / (xi * std::cosh(xi) * std::cosh(xi)); }

TEST(ExactProbability, HongOuMandel) {
  const auto input = hom_input();
  EXPECT_LT(stellar::exact_probability(input, stellar::fock_outcome({1, 1}), 8), 1e-28);
  EXPECT_NEAR(stellar::exact_probability(input, stellar::fock_outcome({2, 0}), 8), 0.5, 1e-14);
  EXPECT_NEAR(stellar::exact_probability(input, stellar::fock_outcome({0, 2}), 8), 0.5, 1e-14);
}

TEST(ExactProbability, CoherentProjectorOnVacuum) {
  ProjectorSpec spec;
  spec.coherent = Complex(0.6, -0.3);
  const double p = stellar::exact_probability(CoreState::vacuum(1), {spec}, 20);
  EXPECT_NEAR(p, std::exp(-std::norm(spec.coherent)), 1e-13);
}

TEST(Estimate, FockOutcomesCarryTheClosedFormBias) {
  const auto input = hom_input();
  for (double xi : {0.2, 0.05, 0.01}) {
    const double ratio = std::pow(fock_ratio(xi), 4);
    const auto split = stellar::fock_outcome({1, 1});
    GaussianCircuit none(2);
    const SystemInput ones(CoreState::fock({1, 1}), none);
    const auto separate = stellar::evaluate_sampler(stellar::build_sampler(ones, split, GadgetPlan::uniform(split, xi)), 8);
    EXPECT_NEAR(separate.p_estimate, ratio, 1e-12);
    EXPECT_NEAR(separate.p_tilde, 1.0, 1e-12);
    // Both photons on one mode: the second subtraction sees one extra (cosh xi)^{-1} in amplitude.
    const auto bunched = stellar::fock_outcome({2, 0});
    const auto setup = stellar::build_sampler(input, bunched, GadgetPlan::uniform(bunched, xi));
    EXPECT_EQ(setup.auxiliary_count, 2u);
    const auto detail = stellar::evaluate_sampler(setup, 8);
    const double c2 = std::cosh(xi) * std::cosh(xi);
    EXPECT_NEAR(detail.p_estimate, 0.5 * ratio / c2, 1e-12);
    EXPECT_NEAR(detail.p_tilde, 0.5 / c2, 1e-12);
  }
}

TEST(Estimate, WithinEpsilonUnderAutomaticPlan) {
  stellar::Rng rng(61);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t m = 1 + trial % 2;
    const CoreState core = oracle::random_core_state(m, 3, 3, rng);
    const auto circuit = oracle::random_gaussian_circuit(m, 3, 0.3, rng);
    const SystemInput input(core, circuit);
    OutcomeSpec outcome;
    for (std::size_t k = 0; k < m; ++k) outcome.push_back(oracle::random_projector(static_cast<int>(rng.below(2)), 0.4, rng));
    const double eps = 0.05;
    const auto plan = stellar::choose_xi(outcome, eps, m, 12);
    const int cutoff = 22;
    const double exact = stellar::exact_probability(input, outcome, cutoff);
    const double estimate = stellar::estimate_probability(stellar::build_sampler(input, outcome, plan), cutoff);
    EXPECT_LE(std::abs(estimate - exact), eps) << trial;
    EXPECT_LE(estimate, exact + 1e-9);
  }
}

TEST(Estimate, AuxiliaryCountIsTotalRank) {
  OutcomeSpec outcome(3);
  outcome[0].additions = {0.0, Complex(0.1, 0.2)};
  outcome[2].additions = {0.3};
  const auto setup = stellar::build_sampler(SystemInput(CoreState::vacuum(3)), outcome, GadgetPlan::uniform(outcome, 0.1));
  EXPECT_EQ(setup.auxiliary_count, 3u);
  EXPECT_EQ(setup.total_modes(), 6u);
  EXPECT_EQ(setup.auxiliary_owner, (std::vector<std::size_t>{0, 0, 2}));
  EXPECT_EQ(setup.assembled_input().modes(), 6u);
}

TEST(Estimate, DenseAndStructuredInputsAgree) {
  const auto input = hom_input();
  const auto outcome = stellar::fock_outcome({1, 1});
  const auto plan = GadgetPlan::uniform(outcome, 0.1);
  OutcomeSpec shifted = outcome;
  shifted[1].coherent = Complex(0.2, 0.1);
  for (const auto& o : {outcome, shifted}) {
    const auto p = GadgetPlan::uniform(o, 0.1);
    const double structured = stellar::estimate_probability(stellar::build_sampler(input, o, p), 12);
    const double dense = stellar::estimate_probability(stellar::build_sampler(input.materialize(12), o, p), 12);
    EXPECT_NEAR(structured, dense, 1e-14);
  }
  EXPECT_EQ(error_of([&] { stellar::estimate_probability(stellar::build_sampler(input.materialize(10), outcome, plan), 12); }),
            ErrorCode::DimensionMismatch);
}

TEST(Estimate, Errors) {
  const auto input = hom_input();
  const auto outcome = stellar::fock_outcome({1, 1});
  GadgetPlan bad = GadgetPlan::uniform(outcome, 0.1);
  bad.xi[0].push_back(0.1);
  EXPECT_EQ(error_of([&] { stellar::build_sampler(input, outcome, bad); }), ErrorCode::PlanMismatch);
  const auto wide = stellar::fock_outcome({1, 1, 0});
  EXPECT_EQ(error_of([&] { stellar::build_sampler(input, wide, GadgetPlan::uniform(wide, 0.1)); }),
            ErrorCode::DimensionMismatch);
  GaussianCircuit loud(1);
  loud.add(GaussianGate::displacement(0, 2.5));
  EXPECT_EQ(error_of([&] { stellar::exact_probability(SystemInput(CoreState::vacuum(1), loud), {ProjectorSpec{}}, 6); }),
            ErrorCode::CutoffTooSmall);
}

TEST(Marginal, PrefixMatchesSummedOutcomes) {
  stellar::Rng rng(62);
  const CoreState core = oracle::random_core_state(3, 3, 3, rng);
  const auto circuit = oracle::random_gaussian_circuit(3, 3, 0.25, rng);
  const auto dense = SystemInput(core, circuit).materialize(14);
  const auto prefix = stellar::fock_outcome({1});
  double summed = 0.0;
  for (int b = 0; b <= 14; ++b)
    for (int c = 0; c <= 14; ++c) summed += stellar::exact_probability(dense, stellar::fock_outcome({1, b, c}));
  const auto plan = stellar::choose_xi(prefix, 0.05, 3, 12);
  const auto r = stellar::marginal_probability(dense, prefix, plan);
  EXPECT_NEAR(r.exact, summed, 1e-10);
  EXPECT_LE(std::abs(r.estimate - r.exact), 0.05);
  EXPECT_EQ(r.auxiliary_count, 1u);
}

TEST(Marginal, EveryPrefixLengthStaysWithinEpsilon) {
  stellar::Rng rng(63);
  const CoreState core = oracle::random_core_state(3, 3, 4, rng);
  const auto dense = SystemInput(core, oracle::random_gaussian_circuit(3, 3, 0.25, rng)).materialize(16);
  OutcomeSpec full;
  for (int k = 0; k < 3; ++k) full.push_back(oracle::random_projector(1, 0.3, rng));
  for (std::size_t len = 1; len <= 3; ++len) {
    const OutcomeSpec prefix(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(len));
    const auto r = stellar::marginal_probability(dense, prefix, stellar::choose_xi(prefix, 0.1, 3, 12));
    EXPECT_LE(std::abs(r.estimate - r.exact), 0.1) << len;
    EXPECT_EQ(r.auxiliary_count, len);
  }
}

TEST(BosonSampling, PermanentFormulaMatchesFockSimulation) {
  stellar::Rng rng(64);
  const auto u = stellar::haar_unitary(3, rng);
  const SystemInput input(CoreState::fock({1, 1, 0}), stellar::interferometer_circuit(u));
  const auto dense = input.materialize(4);
  double total = 0.0;
  for (int a = 0; a <= 2; ++a) {
    for (int b = 0; a + b <= 2; ++b) {
      const std::vector<int> out = {a, b, 2 - a - b};
      const double p = stellar::bs_probability(u, {1, 1, 0}, out);
      EXPECT_NEAR(p, stellar::exact_probability(dense, stellar::fock_outcome(out)), 1e-12);
      total += p;
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(error_of([&] { stellar::bs_probability(u, {1, 1, 0}, {1, 0, 0}); }), ErrorCode::PhotonNumberMismatch);
  EXPECT_EQ(error_of([&] { stellar::bs_probability(u, {1, 1}, {1, 1}); }), ErrorCode::DimensionMismatch);
}

TEST(GaussianBosonSampling, SqueezedVacuumPairs) {
  const double r = 0.4;
  GaussianCircuit c(1);
  c.add(GaussianGate::squeeze(0, r));
  const double t = std::tanh(r);
  EXPECT_NEAR(stellar::gbs_probability(c, {0}), 1.0 / std::cosh(r), 1e-14);
  EXPECT_NEAR(stellar::gbs_probability(c, {2}), t * t / (2.0 * std::cosh(r)), 1e-14);
  EXPECT_NEAR(stellar::gbs_probability(c, {1}), 0.0, 1e-30);
}

TEST(GaussianBosonSampling, MatchesFockSimulation) {
  stellar::Rng rng(65);
  GaussianCircuit c(3);
  for (std::size_t k = 0; k < 3; ++k) c.add(GaussianGate::squeeze(k, 0.3));
  c.append(stellar::interferometer_circuit(stellar::haar_unitary(3, rng)));
  const auto dense = SystemInput(CoreState::vacuum(3), c).materialize(16);
  for (const auto& out : std::vector<std::vector<int>>{{1, 1, 0}, {0, 1, 1}, {2, 0, 0}, {1, 1, 2}}) {
    EXPECT_NEAR(stellar::gbs_probability(c, out), stellar::exact_probability(dense, stellar::fock_outcome(out)), 1e-11);
  }
}

TEST(StrongSimulation, BeamSplitterWithinEpsilon) {
  GaussianCircuit bs(2);
  bs.add(GaussianGate::beamsplitter(0, 1, std::numbers::pi / 4, 0.0));
  const SystemInput single(CoreState::fock({1, 0}), bs);
  const auto r = stellar::strong_simulate(single, stellar::fock_outcome({1, 0}), 0.01);
  EXPECT_LE(std::abs(r.probability - 0.5), 0.01);
  EXPECT_NEAR(r.p_tilde, 0.5, 1e-9);
  EXPECT_EQ(r.term_count, 1u);
  EXPECT_EQ(r.max_matrix_dimension, 2u);
  EXPECT_EQ(r.plan.auxiliary_count(), 1u);
  const auto hom = stellar::strong_simulate(hom_input(), stellar::fock_outcome({1, 1}), 0.01);
  EXPECT_LT(hom.probability, 1e-25);
  EXPECT_EQ(hom.max_matrix_dimension, 4u);
}

TEST(StrongSimulation, BunchedFockOutcomesUnderflowAutomaticPlans) {
  EXPECT_EQ(error_of([] { stellar::strong_simulate(hom_input(), stellar::fock_outcome({2, 0}), 0.01); }),
            ErrorCode::UnderflowRisk);
}

TEST(StrongSimulation, AgreesWithFockEvolution) {
  stellar::Rng rng(66);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const CoreState core = oracle::random_core_state(m, 3, 3, rng);
    const SystemInput input(core, oracle::random_gaussian_circuit(m, 4, 0.3, rng));
    OutcomeSpec outcome;
    for (std::size_t k = 0; k < m; ++k) outcome.push_back(oracle::random_projector(static_cast<int>(rng.below(3)), 0.4, rng));
    const auto plan = GadgetPlan::uniform(outcome, 0.2);
    stellar::StrongSimOptions options;
    options.xi_mode = stellar::XiMode::Uniform;
    options.xi = 0.2;
    const auto strong = stellar::strong_simulate(input, outcome, 0.5, options);
    const int cutoff = m == 3 ? 12 : 20;
    const double dense = stellar::estimate_probability(stellar::build_sampler(input, outcome, plan), cutoff);
    EXPECT_NEAR(strong.probability, dense, 1e-9 * std::max(1.0, dense) + 1e-13) << trial;
    EXPECT_EQ(strong.term_count, core.support_size());
    const double correction = stellar::build_sampler(input, outcome, plan).correction;
    EXPECT_NEAR(strong.p_tilde, strong.probability / correction, 1e-15 * std::max(1.0, strong.p_tilde));
  }
}

TEST(StrongSimulation, TruncatedInputUsesRankBudget) {
  const auto coherent = stellar::truncated_coherent(Complex(0.3), 20);
  ProjectorSpec spec;
  spec.additions = {0.0};
  const auto r = stellar::strong_simulate(coherent, {spec}, 0.1, 4);
  EXPECT_LE(r.approximation_distance, 0.1);
  EXPECT_EQ(r.term_count, 5u);
  EXPECT_LE(std::abs(r.probability - 0.09 * std::exp(-0.09)), 0.1);
  EXPECT_EQ(error_of([&] { stellar::strong_simulate(coherent, {spec}, 1e-6, 1); }), ErrorCode::RankBudgetTooSmall);
}

TEST(StrongSimulation, FrameRemovesGaussianPart) {
  GaussianCircuit prep(1);
  prep.add(GaussianGate::displacement(0, Complex(0.8, -0.4)));
  const auto dense = stellar::apply(prep, stellar::to_truncated(CoreState::fock({1}), 30));
  stellar::StrongSimOptions options;
  options.frame = prep.inverse();
  ProjectorSpec spec;
  spec.coherent = Complex(0.5, 0.2);
  const auto r = stellar::strong_simulate(dense, {spec}, 0.01, 1, options);
  EXPECT_LT(r.approximation_distance, 1e-8);
  EXPECT_NEAR(r.probability, stellar::exact_probability(dense, {spec}), 1e-10);
  // the rank-1 cut keeps |0> (with round-off weight) and |1>
  EXPECT_LE(r.term_count, 2u);
}

TEST(Sweep, MultiplicativeErrorMatchesClosedForm) {
  stellar::SweepConfig config;
  config.xi = {1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3};
  config.instances = 3;
  config.seed = 7;
  const auto rows = stellar::run_sweep(config);
  ASSERT_EQ(rows.size(), 15u);
  // Rows come sorted by ascending xi; frozen values listed from xi = 0.1 down.
  const double frozen[] = {3.27217359e-02, 3.32714182e-03, 3.33271342e-04, 3.33327133e-05, 3.33332713e-06};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double x = rows[i].xi;
    const double oracle = 1.0 - std::pow(fock_ratio(x), 4);
    EXPECT_NEAR(rows[i].mult_error, oracle, 1e-6 * oracle);
    EXPECT_NEAR(rows[i].mult_error, frozen[4 - i % 5], 1e-8 * frozen[4 - i % 5] + 1e-6 * oracle);
  }
  EXPECT_NEAR(stellar::log_log_slope(rows), 1.99662349, 1e-6);
}

TEST(Sweep, GaussianProtocolAndDeterminism) {
  stellar::SweepConfig config;
  config.protocol = "gbs";
  config.xi = {0.1, 0.01};
  config.instances = 2;
  config.seed = 11;
  const auto rows = stellar::run_sweep(config);
  for (const auto& r : rows) {
    const double oracle = 1.0 - std::pow(fock_ratio(r.xi), 4);
    EXPECT_NEAR(r.mult_error, oracle, 1e-6 * oracle);
  }
  config.threads = 2;
  const auto threaded = stellar::run_sweep(config);
  ASSERT_EQ(threaded.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(threaded[i].p_estimate, rows[i].p_estimate);
}

TEST(Sweep, ConfigValidation) {
  stellar::SweepConfig config;
  config.xi = {0.1};
  EXPECT_NO_THROW(config.validate());
  auto bad = config;
  bad.protocol = "gbs";
  bad.photons = 3;
  EXPECT_EQ(error_of([&] { bad.validate(); }), ErrorCode::InvalidArgument);
  bad = config;
  bad.xi = {0.6};
  EXPECT_EQ(error_of([&] { bad.validate(); }), ErrorCode::InvalidArgument);
  bad = config;
  bad.modes = 7;
  EXPECT_EQ(error_of([&] { bad.validate(); }), ErrorCode::InvalidArgument);
  bad = config;
  bad.photons = 5;
  EXPECT_EQ(error_of([&] { bad.validate(); }), ErrorCode::InvalidArgument);
}

TEST(Sweep, CollisionFreePatterns) {
  stellar::Rng rng(67);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = stellar::random_collision_free(5, 3, rng);
    int total = 0;
    for (int v : p) {
      EXPECT_LE(v, 1);
      total += v;
    }
    EXPECT_EQ(total, 3);
  }
}

}  // namespace
