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
#include <cstdint>
#include <numeric>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "stellar/error.hpp"
#include "stellar/io.hpp"
#include "stellar/random.hpp"
#include "stellar/sampler.hpp"

namespace stellar {

inline constexpr double kMinExactProbability = 1e-12;
inline constexpr int kMaxRedraws = 1000;

struct SweepConfig {
  std::string protocol = "bs";
  std::size_t modes = 4;
  int photons = 2;
  double squeezing = 0.3;
  std::vector<double> xi;
  std::size_t instances = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const {
    if (protocol != "bs" && protocol != "gbs") throw Error(ErrorCode::InvalidArgument, "protocol must be bs or gbs");
    if (modes < 1 || modes > 6) throw Error(ErrorCode::InvalidArgument, "sweeps support 1 to 6 modes");
    if (photons < 1 || photons > 3) throw Error(ErrorCode::InvalidArgument, "sweeps support 1 to 3 photons");
    if (static_cast<std::size_t>(photons) > modes) throw Error(ErrorCode::InvalidArgument, "more photons than modes");
    if (protocol == "gbs" && photons % 2 != 0) {
      throw Error(ErrorCode::InvalidArgument, "pure squeezed inputs only produce even photon counts");
    }
    if (xi.empty()) throw Error(ErrorCode::InvalidArgument, "empty xi list");
    for (double x : xi) {
      if (!(x > 0.0 && x <= kMaxXi)) throw Error(ErrorCode::InvalidArgument, "xi must lie in (0, 0.5]");
    }
  }
};

/// One random instance of a sweep: input, outcome pattern and exact probability.
struct SweepInstance {
  SystemInput input{CoreState::vacuum(1)};
  std::vector<int> outcome;
  double p_exact = 0.0;
  int redraws = 0;
};

inline std::vector<int> random_collision_free(std::size_t modes, int photons, Rng& rng) {
  std::vector<std::size_t> order(modes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < static_cast<std::size_t>(photons); ++i) {
    const std::size_t j = i + rng.below(modes - i);
    std::swap(order[i], order[j]);
  }
  std::vector<int> pattern(modes, 0);
  for (int i = 0; i < photons; ++i) pattern[order[static_cast<std::size_t>(i)]] = 1;
  return pattern;
}

inline OutcomeSpec fock_outcome(const std::vector<int>& pattern) {
  OutcomeSpec out;
  for (int n : pattern) {
    ProjectorSpec spec;
    spec.additions.assign(static_cast<std::size_t>(n), Complex(0.0));
    out.push_back(spec);
  }
  return out;
}

/// Draws instance `index`; redraws while the exact probability is below 1e-12.
inline SweepInstance draw_sweep_instance(const SweepConfig& config, std::size_t index) {
  Rng rng = Rng::stream(config.seed, index);
  SweepInstance inst;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    const ComplexMatrix u = haar_unitary(config.modes, rng);
    inst.outcome = random_collision_free(config.modes, config.photons, rng);
    const GaussianCircuit interferometer = interferometer_circuit(u);
    if (config.protocol == "bs") {
      std::vector<int> photons(config.modes, 0);
      for (int i = 0; i < config.photons; ++i) photons[static_cast<std::size_t>(i)] = 1;
      inst.input = SystemInput(CoreState::fock(photons), interferometer);
      inst.p_exact = bs_probability(u, photons, inst.outcome);
    } else {
      GaussianCircuit prep(config.modes);
      for (std::size_t k = 0; k < config.modes; ++k) prep.add(GaussianGate::squeeze(k, config.squeezing));
      prep.append(interferometer);
      inst.input = SystemInput(CoreState::vacuum(config.modes), prep);
      inst.p_exact = gbs_probability(prep, inst.outcome);
    }
    if (inst.p_exact >= kMinExactProbability) return inst;
    ++inst.redraws;
  }
  throw Error(ErrorCode::UnderflowRisk, "no instance with exact probability above 1e-12");
}

/// Rows sorted by (instance, xi); the thread count never changes the result.
inline std::vector<io::SweepRow> run_sweep(const SweepConfig& config, std::vector<std::string>* log = nullptr) {
  config.validate();
  std::vector<std::vector<io::SweepRow>> per_instance(config.instances);
  std::vector<int> redraws(config.instances, 0);
  auto work = [&](std::size_t i) {
    const SweepInstance inst = draw_sweep_instance(config, i);
    redraws[i] = inst.redraws;
    const OutcomeSpec outcome = fock_outcome(inst.outcome);
    for (double x : config.xi) {
      StrongSimOptions options;
      options.xi_mode = XiMode::Uniform;
      options.xi = x;
      const double estimate = strong_simulate(inst.input, outcome, 1.0, options).probability;
      per_instance[i].push_back(
          {i, config.protocol, x, inst.p_exact, estimate, std::abs(estimate - inst.p_exact) / inst.p_exact});
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(config.threads, 1, std::max<std::size_t>(1, config.instances));
  if (workers <= 1) {
    for (std::size_t i = 0; i < config.instances; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < config.instances; i += workers) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  std::vector<io::SweepRow> rows;
  for (std::size_t i = 0; i < config.instances; ++i) {
    if (log && redraws[i] > 0) {
      log->push_back("instance " + std::to_string(i) + ": redrew " + std::to_string(redraws[i]) +
                     " times (exact probability below 1e-12)");
    }
    rows.insert(rows.end(), per_instance[i].begin(), per_instance[i].end());
  }
  std::stable_sort(rows.begin(), rows.end(), [](const io::SweepRow& a, const io::SweepRow& b) {
    return std::tie(a.instance, a.xi) < std::tie(b.instance, b.xi);
  });
  return rows;
}

/// Least-squares slope of log(mult_error) against log(xi), skipping zero errors.
inline double log_log_slope(const std::vector<io::SweepRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double count = 0;
  for (const auto& r : rows) {
    if (!(r.mult_error > 0.0)) continue;
    const double x = std::log(r.xi);
    const double y = std::log(r.mult_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    count += 1;
  }
  const double denom = count * sxx - sx * sx;
  if (count < 2 || denom <= 0.0) throw Error(ErrorCode::InvalidArgument, "slope needs two distinct xi values");
  return (count * sxy - sx * sy) / denom;
}

}  // namespace stellar
