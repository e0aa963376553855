// fock.hpp
// Truncated bosonic/fermionic Fock spaces, the number and free-energy
// operators, constraint sets K = { rho : Tr(rho A_i) in [0, b_i] }, and the
// truncation projections P_eps with their trace-norm estimates.

#pragma once

#include "qfix/operator_core.hpp"
#include "qfix/random.hpp"

#include <cstdint>
#include <vector>

namespace qfix {

enum class Statistics { boson, fermion };

const char* to_string(Statistics s) noexcept;

inline constexpr Index kDefaultBasisCap = 4096;
inline constexpr double kDefaultKTol = 1e-9;

struct FockState {
  std::vector<int> occupations;
  int n = 0;      // total particle number
  double e = 0.0; // total energy
};

/// Occupation-number basis restricted to n <= n_max and e <= e_max,
/// enumerated in lexicographic order of the occupation vectors.
class FockSpace {
public:
  /// Throws InvalidArgument for non-positive or descending energies, negative
  /// cutoffs, or when the basis would exceed basis_cap.
  FockSpace(std::vector<double> mode_energies, Statistics statistics, int n_max, double e_max,
            Index basis_cap = kDefaultBasisCap);

  const std::vector<double>& mode_energies() const noexcept { return energies_; }
  Statistics statistics() const noexcept { return statistics_; }
  int n_max() const noexcept { return n_max_; }
  double e_max() const noexcept { return e_max_; }
  const std::vector<FockState>& basis() const noexcept { return basis_; }
  Index dim() const noexcept { return static_cast<Index>(basis_.size()); }

  /// Index of the vacuum (always 0 in lexicographic order).
  Index vacuum_index() const noexcept { return 0; }

private:
  std::vector<double> energies_;
  Statistics statistics_;
  int n_max_;
  double e_max_;
  std::vector<FockState> basis_;
};

FockSpace build_fock(std::vector<double> mode_energies, Statistics statistics, int n_max, double e_max,
                     Index basis_cap = kDefaultBasisCap);

ComplexMatrix number_operator(const FockSpace& f);
ComplexMatrix energy_operator(const FockSpace& f);

/// Number of basis vectors with n <= a1 and e <= a2.
Index spectral_subspace_dim(const FockSpace& f, double a1, double a2);

/// sum_{n in Z cap [0, a1]} i(a2)^n, where i(a2) counts one-particle levels <= a2.
double combinatorial_rank_bound(const FockSpace& f, double a1, double a2);

/// Joint spectrum of the commuting observables: one point (x_1..x_m) per basis vector.
struct PvmGrid {
  std::vector<RealVector> points;
  Index m() const noexcept { return points.empty() ? 0 : points.front().size(); }
};

/// Commuting positive observables, stored by their diagonals in the working basis,
/// and the bound vector b of the box B = prod [0, b_i].
class ConstraintSet {
public:
  ConstraintSet(std::vector<RealVector> diagonals, RealVector bounds);

  /// A_1 = N, A_2 = E on the given Fock space.
  static ConstraintSet number_energy(const FockSpace& f, double n_bound, double e_bound);

  Index m() const noexcept { return static_cast<Index>(diagonals_.size()); }
  Index dim() const noexcept { return diagonals_.empty() ? 0 : diagonals_.front().size(); }
  const std::vector<RealVector>& diagonals() const noexcept { return diagonals_; }
  const RealVector& bounds() const noexcept { return bounds_; }
  ComplexMatrix observable(Index i) const;

  PvmGrid grid() const;

  /// Basis indices whose joint-spectrum point lies inside B.
  std::vector<Index> box_indices() const;

private:
  std::vector<RealVector> diagonals_;
  RealVector bounds_;
};

struct MembershipResult {
  bool member = false;
  RealVector expectations;
};

MembershipResult k_membership(const ComplexMatrix& rho, const ConstraintSet& k, double k_tol = kDefaultKTol);
inline MembershipResult k_membership(const DensityOperator& rho, const ConstraintSet& k, double k_tol = kDefaultKTol) {
  return k_membership(rho.matrix(), k, k_tol);
}

/// alpha*rho_a + (1-alpha)*rho_b is a member and its expectation vector is the
/// same convex combination (to 1e-12).
bool convexity_check(const DensityOperator& rho_a, const DensityOperator& rho_b, double alpha, const ConstraintSet& k,
                     double k_tol = kDefaultKTol);

/// Least positive integer n with 4 m b / n < eps^2.
std::int64_t cutoff_for(Index m, double b, double epsilon);

struct TruncationProjection {
  double epsilon = 0.0;
  std::vector<std::int64_t> n_cutoffs;
  Projection projection;
  /// Some cutoff lies at or beyond the largest coordinate of the truncated
  /// basis, so the finite model already truncates harder than P_eps.
  bool exceeds_basis_range = false;
};

TruncationProjection truncation_projection(const ConstraintSet& k, const PvmGrid& grid, double epsilon);

struct MarkovResult {
  double mass = 0.0; // Tr(rho P_eps)
  double bound = 0.0; // 1 - eps^2/4
  bool pass = false;
};

MarkovResult markov_mass_check(const DensityOperator& rho, const TruncationProjection& p_eps);

struct TruncationDefect {
  double defect = 0.0;       // ||P rho P - rho||_1
  double jensen_bound = 0.0; // 2 sqrt(Tr((1-P) rho))
  bool within_epsilon = false;
  bool pass = false;
};

TruncationDefect truncation_defect(const DensityOperator& rho, const TruncationProjection& p_eps);

struct RankOneNorm {
  double beta = 0.0;
  double numeric = 0.0;
  double closed_form = 0.0;
  double two_beta_bound = 0.0;
};

/// Trace norm of P|psi><psi|P - |psi><psi| next to beta*sqrt(4 - 3 beta^2),
/// beta = ||(1-P) psi||. Throws InvalidArgument for non-unit psi.
RankOneNorm rank_one_truncation_norm(const ComplexVector& psi, const Projection& p);

/// The 2x2 block of P|psi><psi|P - |psi><psi| on span{a, b} for
/// psi = alpha a + beta b.
Eigen::Matrix2cd rank_one_block(Complex alpha, Complex beta);

/// Closed-form eigenvalues -beta/2 (beta -/+ sqrt(4 - 3 beta^2)), ascending.
Eigen::Vector2d rank_one_block_eigenvalues(double beta);

/// Seeded sample of members of K on the given Fock space: random states on the
/// in-box sub-basis, half of them mixed with a random state on the full
/// truncated space at a weight that keeps every expectation inside B.
/// Throws InvalidArgument ("K sampler has no support") when no basis vector lies in B.
std::vector<DensityOperator> sample_k(const ConstraintSet& k, const FockSpace& f, Index count, std::uint64_t seed);

} // namespace qfix
