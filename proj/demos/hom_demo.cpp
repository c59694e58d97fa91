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

// Hong-Ou-Mandel dip: |1,1> through a balanced beamsplitter.

#include <iostream>
#include <numbers>

#include "stellar/io.hpp"
#include "stellar/sampler.hpp"

int main() {
  using namespace stellar;
  GaussianCircuit bs(2);
  bs.add(GaussianGate::beamsplitter(0, 1, std::numbers::pi / 4, 0.0));
  const SystemInput input(CoreState::fock({1, 1}), bs);
  const int patterns[3][2] = {{2, 0}, {1, 1}, {0, 2}};
  for (const auto& p : patterns) {
    OutcomeSpec outcome(2);
    for (int k = 0; k < 2; ++k) outcome[static_cast<std::size_t>(k)].additions.assign(static_cast<std::size_t>(p[k]), 0.0);
    const double exact = exact_probability(input, outcome, 8);
    StrongSimOptions options;
    options.xi_mode = XiMode::Uniform;
    const StrongSimResult sim = strong_simulate(input, outcome, 0.01, options);
    std::cout << "|" << p[0] << "," << p[1] << ">  exact " << io::format_double(exact) << "  strong "
              << io::format_double(sim.p_tilde) << "\n";
  }
  return 0;
}
