// fixpoint.hpp
// Fixed points of channels: Cesaro averaging, spectral solving on the
// superoperator, fixed-point multiplicity and trace-norm residuals.

#pragma once

#include "qfix/channels.hpp"

#include <cstdint>
#include <string>

namespace qfix {

inline constexpr double kDefaultEigClusterTol = 1e-8;

enum class FixedPointMethod { cesaro, spectral };

const char* to_string(FixedPointMethod m) noexcept;

struct FixedPointResult {
  DensityOperator rho;
  double residual = 0.0; // ||S(rho) - rho||_1
  FixedPointMethod method = FixedPointMethod::cesaro;
  std::int64_t iterations_or_multiplicity = 0;
};

/// ||S(rho) - rho||_1
double residual(const Channel& s, const ComplexMatrix& rho);
inline double residual(const Channel& s, const DensityOperator& rho) { return residual(s, rho.matrix()); }

/// Running Cesaro mean (1/(N+1)) sum_{k=0}^{N} S^k(rho0), one channel
/// application per step and O(d^2) memory. The residual obeys
/// ||S(rho(N)) - rho(N)||_1 <= 2/(N+1).
FixedPointResult cesaro_iterate(const Channel& s, const DensityOperator& rho0, std::int64_t n);

/// Same as cesaro_iterate but returns the raw (uncertified) mean. Exposed for
/// the telescoping identity check.
ComplexMatrix cesaro_mean(const Channel& s, const ComplexMatrix& rho0, std::int64_t n);

/// Number of superoperator eigenvalues with |lambda - 1| <= tol, with multiplicity.
std::int64_t fixed_point_multiplicity(const Channel& s, double tol = kDefaultEigClusterTol);

struct SpectralOptions {
  double tol = 1e-8;
  double eig_cluster_tol = kDefaultEigClusterTol;
};

/// Projects the maximally mixed state onto the eigenvalue-1 eigenspace of the
/// superoperator (along the complementary spectral subspace), repairs the
/// result to a state, and falls back to cesaro_iterate with N = ceil(2/tol)
/// when the repair discards more than tol in trace norm.
/// Throws NumericalError when no eigenvalue lies within eig_cluster_tol of 1.
FixedPointResult spectral_fixed_point(const Channel& s, const SpectralOptions& opts = {});

/// Symmetrize, drop the negative part, renormalize. Returns the discarded
/// trace norm in *discarded.
ComplexMatrix repair_to_state(const ComplexMatrix& m, double* discarded);

} // namespace qfix
