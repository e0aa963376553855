// ctc.hpp
// Deutsch-consistent histories around a closed timelike curve.
//
// The full space is H_in (x) H_F, chronology-respecting factor first. The
// once-around channel on H_F is S(rho) = Tr_in( U (rho_in (x) rho) U^dagger )
// with rho_in = Tr_F(rho_{T1-}); consistency demands S(rho_1) = rho_1.

#pragma once

#include "qfix/channels.hpp"
#include "qfix/fixpoint.hpp"
#include "qfix/fock.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qfix {

enum class SpliceRule { vacuum_splice, recycle_splice };

const char* to_string(SpliceRule r) noexcept;

struct CtcScenario {
  Index h_in_dim = 0;
  FockSpace fock;
  ComplexMatrix u;
  DensityOperator rho_t1_minus;
  SpliceRule post_t2_rule = SpliceRule::vacuum_splice;

  Index fock_dim() const noexcept { return fock.dim(); }
  Index full_dim() const noexcept { return h_in_dim * fock.dim(); }

  /// Throws DimensionError / InvalidArgument when the invariants fail.
  void validate() const;
};

struct ConsistentHistory {
  DensityOperator rho_in;
  DensityOperator rho1;
  DensityOperator rho_t2_minus;
  DensityOperator rho_t2_plus;
  double consistency_residual = 0.0; // ||Tr_in(rho_{T2-}) - rho_1||_1
  std::int64_t multiplicity = 0;
  FixedPointMethod method = FixedPointMethod::spectral;
};

DensityOperator derive_rho_in(const CtcScenario& scenario);

Channel build_ctc_channel(const CtcScenario& scenario);

ConsistentHistory solve_history(const CtcScenario& scenario, const SpectralOptions& opts = {});

inline constexpr double kDefaultPhaseTol = 1e-9;

struct CylinderFixedPoints {
  DensityOperator diagonal_fixed_state;
  double residual = 0.0;
  std::vector<std::int64_t> resonant_k; // eigenvalues equal to 2 pi k / t
};

/// e^{-iHt}
ComplexMatrix cylinder_evolution(const ComplexMatrix& h, double t);

CylinderFixedPoints cylinder_fixed_points(const ComplexMatrix& h, double t, double phase_tol = kDefaultPhaseTol);

struct ProbeSample {
  RealVector before;
  RealVector after;
  bool member_after = false;
};

struct ProbeReport {
  std::int64_t violations = 0;
  double worst_excess = 0.0;
  std::vector<ProbeSample> per_sample;
};

/// Sampling falsifier for S(K) subset K. Reports evidence only.
ProbeReport k_invariance_probe(const Channel& s, const ConstraintSet& k, const FockSpace& f, Index samples,
                               std::uint64_t seed);

} // namespace qfix
