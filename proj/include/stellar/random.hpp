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

#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "stellar/numerics.hpp"

namespace stellar {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// mt19937_64 with explicitly defined uniform and normal transforms, so draws do not depend
/// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream `index` of a master seed.
  static Rng stream(std::uint64_t master, std::uint64_t index) {
    return Rng(splitmix64(splitmix64(master) ^ splitmix64(index + 0x5851F42D4C957F2DULL)));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal by Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Complex normal with E|z|^2 = 1.
  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of diag(R) removed.
inline ComplexMatrix haar_unitary(std::size_t n, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(n);
  Eigen::MatrixXcd z(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) z(r, c) = rng.complex_normal();
  }
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(d, d);
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  ComplexMatrix u(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const Complex rc = r(c, c);
    const Complex phase = std::abs(rc) > 0.0 ? rc / std::abs(rc) : Complex(1.0);
    for (Eigen::Index row = 0; row < d; ++row) u(row, c) = q(row, c) * phase;
  }
  return u;
}

}  // namespace stellar
