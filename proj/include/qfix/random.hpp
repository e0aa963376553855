// random.hpp
// Seeded generators for random operators, states and channels. Used by the
// K-sampler, the CLI trial drivers and the test suites.

#pragma once

#include "qfix/operator_core.hpp"

#include <cstdint>
#include <random>

namespace qfix {

using Rng = std::mt19937_64;

/// Matrix with i.i.d. standard complex Gaussian entries.
inline ComplexMatrix ginibre(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  return g;
}

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
inline ComplexMatrix random_unitary(Index d, Rng& rng) {
  const ComplexMatrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

/// Random unit vector, uniform on the sphere.
inline ComplexVector random_unit_vector(Index d, Rng& rng) {
  ComplexVector v = ginibre(d, 1, rng);
  return v / v.norm();
}

/// Random density matrix of the given rank (induced measure G G^dagger / Tr).
inline ComplexMatrix random_density_matrix(Index d, Index rank, Rng& rng) {
  const ComplexMatrix g = ginibre(d, rank, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return (rho + rho.adjoint()) / 2.0;
}

inline ComplexMatrix random_density_matrix(Index d, Rng& rng) { return random_density_matrix(d, d, rng); }

/// Random Hermitian matrix (GUE-like scaling).
inline ComplexMatrix random_hermitian(Index d, Rng& rng) {
  const ComplexMatrix g = ginibre(d, d, rng);
  return (g + g.adjoint()) / 2.0;
}

/// Kraus operators of a random channel: slices of a Haar-random isometry C^d -> C^(k d).
inline std::vector<ComplexMatrix> random_kraus_operators(Index d, Index count, Rng& rng) {
  const ComplexMatrix u = random_unitary(d * count, rng);
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) kraus.emplace_back(u.block(k * d, 0, d, d));
  return kraus;
}

inline Index uniform_index(Index lo, Index hi, Rng& rng) {
  std::uniform_int_distribution<Index> dist(lo, hi);
  return dist(rng);
}

inline double uniform_real(double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng);
}

} // namespace qfix
