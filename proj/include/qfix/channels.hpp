// channels.hpp
// Quantum channels in Kraus, superoperator and Stinespring form.
//
// The superoperator acts on column-stacked operators, so a Kraus operator K
// contributes conj(K) (x) K:  vec(K X K^dagger) = (conj(K) (x) K) vec(X).
// The Choi matrix is sum_ij S(|i><j|) (x) |i><j| (output factor first).

#pragma once

#include "qfix/operator_core.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace qfix {

inline constexpr double kDefaultCptpTol = 1e-8;
inline constexpr double kDefaultKrausDropTol = 1e-12;

struct KrausChannel {
  Index dim = 0;
  std::vector<ComplexMatrix> kraus;
};

struct SuperoperatorMatrix {
  Index dim = 0;
  ComplexMatrix matrix; // dim^2 x dim^2
};

/// S(rho) = Tr_env( u (rho_env (x) rho) u^dagger ), environment factor first.
struct StinespringChannel {
  Index env_dim = 0;
  Index sys_dim = 0;
  ComplexMatrix u;
  DensityOperator rho_env;
};

struct ChoiMatrix {
  Index dim = 0;
  ComplexMatrix matrix; // dim^2 x dim^2
};

/// A linear map on dim x dim operators in one of three representations.
/// Immutable; conversions are free functions below.
class Channel {
public:
  using Representation = std::variant<KrausChannel, SuperoperatorMatrix, StinespringChannel>;

  Channel(KrausChannel k);
  Channel(SuperoperatorMatrix s);
  Channel(StinespringChannel s);

  Index dim() const noexcept { return dim_; }
  const Representation& representation() const noexcept { return repr_; }

  bool is_kraus() const noexcept { return std::holds_alternative<KrausChannel>(repr_); }
  bool is_superop() const noexcept { return std::holds_alternative<SuperoperatorMatrix>(repr_); }
  bool is_stinespring() const noexcept { return std::holds_alternative<StinespringChannel>(repr_); }

  const KrausChannel& kraus() const { return std::get<KrausChannel>(repr_); }
  const SuperoperatorMatrix& superop() const { return std::get<SuperoperatorMatrix>(repr_); }
  const StinespringChannel& stinespring() const { return std::get<StinespringChannel>(repr_); }

  const char* repr_name() const noexcept;

private:
  Representation repr_;
  Index dim_;
};

ComplexMatrix apply(const KrausChannel& c, const ComplexMatrix& rho);
ComplexMatrix apply(const SuperoperatorMatrix& c, const ComplexMatrix& rho);
ComplexMatrix apply(const StinespringChannel& c, const ComplexMatrix& rho);
ComplexMatrix apply(const Channel& c, const ComplexMatrix& rho);

SuperoperatorMatrix kraus_to_superop(const KrausChannel& c);
KrausChannel stinespring_to_kraus(const StinespringChannel& s, double drop_tol = kDefaultKrausDropTol);
SuperoperatorMatrix to_superop(const Channel& c);

ChoiMatrix choi(const Channel& c);

/// Kraus operators from the eigendecomposition of the Choi matrix; eigenvalues
/// below drop_tol are discarded. Throws InvalidArgument when the Choi matrix
/// has an eigenvalue below -neg_tol (map is not completely positive).
KrausChannel choi_to_kraus(const ChoiMatrix& c, double drop_tol = kDefaultKrausDropTol, double neg_tol = 1e-8);

/// ||Sigma K^dagger K - I||_op for Kraus input, ||S^*(I) - I||_op in general.
double trace_preservation_defect(const Channel& c);

struct CptpReport {
  double trace_preserving_defect = 0.0;
  double choi_min_eigenvalue = 0.0;
  double choi_hermiticity_defect = 0.0;
  double tol = 0.0;
  bool pass = false;
};

CptpReport verify_cptp(const Channel& c, double tol = kDefaultCptpTol);

/// Throws InvalidArgument unless sum K^dagger K = I within tol.
KrausChannel make_kraus_channel(std::vector<ComplexMatrix> kraus, double tol = kDefaultCptpTol);

struct DeutschChannel {
  StinespringChannel stinespring;
  KrausChannel kraus;
};

/// Once-around channel S(rho) = Tr_in( u (rho_in (x) rho) u^dagger ).
/// Throws InvalidArgument for non-unitary u and DimensionError on shape mismatch.
DeutschChannel deutsch_channel(const ComplexMatrix& u, const DensityOperator& rho_in, Index env_dim, Index sys_dim,
                               double kraus_drop_tol = kDefaultKrausDropTol);

KrausChannel identity_channel(Index d);
KrausChannel unitary_channel(const ComplexMatrix& u);

/// Finite surrogate of the right shift: V|i> = |i+1> for i < d-1, V|d-1> = 0,
/// plus the sink K = |d-1><d-1| so that the map stays trace preserving.
KrausChannel truncated_shift_channel(Index d);

/// Transpose map X -> X^T as a raw superoperator. Positive, not completely positive.
SuperoperatorMatrix transpose_map(Index d);

/// outer o inner, as a superoperator product.
Channel compose(const Channel& outer, const Channel& inner);

/// ||u^dagger u - I||_op
double unitarity_defect(const ComplexMatrix& u);

/// Matrix with a 1 at (k, l), the operator |k><l|.
ComplexMatrix matrix_unit(Index d, Index k, Index l);

} // namespace qfix
