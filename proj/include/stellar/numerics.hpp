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

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "stellar/error.hpp"

namespace stellar {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr Eigen::Index kBruteForceMaxDim = 12;
inline constexpr Eigen::Index kMaxKernelDim = 60;

struct KernelOptions {
  // Worker threads for the subset loop; results do not depend on this value.
  unsigned threads = 1;
};

struct HafnianValue {
  Complex value;
  bool odd_dimension = false;
};

namespace detail {

inline void require_square(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::NonSquare, "matrix is " + std::to_string(m.rows()) + "x" +
                                          std::to_string(m.cols()));
  }
}

inline void require_symmetric(const ComplexMatrix& m) {
  require_square(m);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTolerance) {
        throw Error(ErrorCode::NonSymmetric, "entries (" + std::to_string(i) + "," +
                                                 std::to_string(j) + ") differ");
      }
    }
  }
}

inline void require_kernel_size(Eigen::Index dim) {
  if (dim > kMaxKernelDim) {
    throw Error(ErrorCode::DimensionTooLarge, "dimension " + std::to_string(dim));
  }
}

// Coefficient of x^k in exp(sum_j p[j-1] x^j).
inline Complex exp_series_coefficient(const std::vector<Complex>& p, std::size_t k) {
  std::vector<Complex> e(k + 1, Complex(0.0));
  e[0] = 1.0;
  for (std::size_t n = 1; n <= k; ++n) {
    Complex s = 0.0;
    for (std::size_t j = 1; j <= n; ++j) s += static_cast<double>(j) * p[j - 1] * e[n - j];
    e[n] = s / static_cast<double>(n);
  }
  return e[k];
}

inline Complex pairwise_sum(const Complex* v, std::size_t n) {
  if (n <= 8) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

// Evaluates term(s) for every subset mask s < 2^k and reduces in a fixed tree order.
template <class Term>
Complex subset_sum(std::size_t k, unsigned threads, Term&& term) {
  const std::uint64_t count = std::uint64_t{1} << k;
  std::vector<Complex> values(count);
  auto work = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t s = begin; s < end; ++s) values[s] = term(s);
  };
  const std::uint64_t workers = std::clamp<std::uint64_t>(threads, 1, count);
  if (workers <= 1) {
    work(0, count);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (count + workers - 1) / workers;
    for (std::uint64_t w = 0; w < workers; ++w) {
      const std::uint64_t begin = w * chunk;
      const std::uint64_t end = std::min(count, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return pairwise_sum(values.data(), values.size());
}

inline std::vector<Eigen::Index> pair_indices(std::uint64_t mask, std::size_t k) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < k; ++i) {
    if ((mask >> i) & 1U) {
      idx.push_back(static_cast<Eigen::Index>(2 * i));
      idx.push_back(static_cast<Eigen::Index>(2 * i + 1));
    }
  }
  return idx;
}

// Power traces tr(B^j), j = 1..k, from the eigenvalues of B.
inline std::vector<Complex> power_traces(const Eigen::MatrixXcd& b, std::size_t k) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(b, false);
  const Eigen::VectorXcd lambda = solver.eigenvalues();
  std::vector<Complex> traces(k, Complex(0.0));
  Eigen::VectorXcd power = lambda;
  for (std::size_t j = 0; j < k; ++j) {
    traces[j] = power.sum();
    power = power.cwiseProduct(lambda);
  }
  return traces;
}

// Shared power-trace kernel; with_loops adds the diagonal contribution.
inline Complex power_trace_hafnian(const ComplexMatrix& a, bool with_loops, unsigned threads) {
  const auto n = static_cast<std::size_t>(a.rows());
  const std::size_t k = n / 2;
  auto term = [&](std::uint64_t mask) -> Complex {
    const auto idx = pair_indices(mask, k);
    const auto d = static_cast<Eigen::Index>(idx.size());
    if (d == 0) return k == 0 ? Complex(1.0) : Complex(0.0);
    Eigen::MatrixXcd b(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) b(r, c) = a(idx[r], idx[c ^ 1]);
    }
    const auto traces = power_traces(b, k);
    std::vector<Complex> p(k);
    for (std::size_t j = 0; j < k; ++j) p[j] = traces[j] / (2.0 * static_cast<double>(j + 1));
    if (with_loops) {
      Eigen::VectorXcd diag(d), swapped(d);
      for (Eigen::Index r = 0; r < d; ++r) diag(r) = a(idx[r], idx[r]);
      for (Eigen::Index r = 0; r < d; ++r) swapped(r) = diag(r ^ 1);
      Eigen::VectorXcd v = diag;
      for (std::size_t j = 0; j < k; ++j) {
        p[j] += 0.5 * swapped.cwiseProduct(v).sum();
        v = b * v;
      }
    }
    const Complex value = exp_series_coefficient(p, k);
    const int parity = static_cast<int>(k) - std::popcount(mask);
    return (parity % 2 == 0) ? value : -value;
  };
  return subset_sum(k, threads, term);
}

inline Complex matching_recursion(const ComplexMatrix& m, std::vector<bool>& used, bool loops) {
  const auto n = static_cast<std::size_t>(m.rows());
  std::size_t i = 0;
  while (i < n && used[i]) ++i;
  if (i == n) return 1.0;
  used[i] = true;
  Complex total = 0.0;
  if (loops) total += m(i, i) * matching_recursion(m, used, loops);
  for (std::size_t j = i + 1; j < n; ++j) {
    if (used[j]) continue;
    used[j] = true;
    total += m(i, j) * matching_recursion(m, used, loops);
    used[j] = false;
  }
  used[i] = false;
  return total;
}

}  // namespace detail

/// Hafnian via the power-trace formula over the 2^(n/2) subsets of index pairs.
/// Odd dimensions give zero and set odd_dimension.
inline HafnianValue hafnian_checked(const ComplexMatrix& m, KernelOptions options = {}) {
  detail::require_symmetric(m);
  if (m.rows() % 2 == 1) return {Complex(0.0), true};
  if (m.rows() == 0) return {Complex(1.0), false};
  detail::require_kernel_size(m.rows());
  return {detail::power_trace_hafnian(m, false, options.threads), false};
}

inline Complex hafnian(const ComplexMatrix& m, KernelOptions options = {}) {
  return hafnian_checked(m, options).value;
}

/// Sum over perfect matchings of the graph with self-loops; diagonal entries weigh loops.
inline Complex loop_hafnian(const ComplexMatrix& m, KernelOptions options = {}) {
  detail::require_symmetric(m);
  if (m.rows() == 0) return 1.0;
  detail::require_kernel_size(m.rows() + 1);
  if (m.rows() % 2 == 0) return detail::power_trace_hafnian(m, true, options.threads);
  const Eigen::Index n = m.rows();
  ComplexMatrix padded = ComplexMatrix::Zero(n + 1, n + 1);
  padded.topLeftCorner(n, n) = m;
  padded(n, n) = 1.0;
  return detail::power_trace_hafnian(padded, true, options.threads);
}

/// Ryser formula with Gray-code column updates.
inline Complex permanent(const ComplexMatrix& m) {
  detail::require_square(m);
  const auto n = static_cast<std::size_t>(m.rows());
  if (n == 0) return 1.0;
  if (n > 40) throw Error(ErrorCode::DimensionTooLarge, "permanent dimension " + std::to_string(n));
  std::vector<Complex> row_sums(n, Complex(0.0));
  Complex total = 0.0;
  std::uint64_t gray = 0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t g = 1; g < count; ++g) {
    const int j = std::countr_zero(g);
    gray ^= std::uint64_t{1} << j;
    const double sign = ((gray >> j) & 1U) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) row_sums[i] += sign * m(i, j);
    Complex product = 1.0;
    for (std::size_t i = 0; i < n; ++i) product *= row_sums[i];
    total += (std::popcount(gray) % 2 == 1) ? -product : product;
  }
  return (n % 2 == 1) ? -total : total;
}

/// Direct enumeration of (loop-)perfect matchings. Reference only.
inline Complex brute_force_matching_sum(const ComplexMatrix& m, bool loops) {
  detail::require_square(m);
  if (m.rows() > kBruteForceMaxDim) {
    throw Error(ErrorCode::DimensionTooLarge,
                "enumeration limited to dimension " + std::to_string(kBruteForceMaxDim));
  }
  std::vector<bool> used(static_cast<std::size_t>(m.rows()), false);
  return detail::matching_recursion(m, used, loops);
}

}  // namespace stellar
