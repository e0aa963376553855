// operator_core.hpp
// Dense complex operator algebra: Kronecker products, partial traces,
// Schatten norms, Hermitian eigendecomposition and density-operator
// certification.
//
// Conventions used throughout qfix:
//   * tensor(a, b) places the first factor on the slow (outer) index,
//     (a (x) b)(i*db + k, j*db + l) = a(i, j) * b(k, l).
//   * operators are vectorized by column stacking, vec(X)[i + j*d] = X(i, j),
//     which is Eigen's native column-major layout.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfix {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shapes that do not fit together (non-square input, factor mismatch, ...).
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A numerical routine failed to converge or to certify its output.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Input violates a documented precondition (non-unitary U, bad state, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

enum class Factor { first, second };

inline constexpr double kDefaultCertTol = 1e-9;
inline constexpr double kDefaultSymmetrizeTol = 1e-8;

namespace detail {

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected square");
  }
}

} // namespace detail

template <typename DerivedA, typename DerivedB>
auto tensor(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(ar * br, ac * bc);
  for (Index j = 0; j < ac; ++j) {
    for (Index i = 0; i < ar; ++i) {
      out.block(i * br, j * bc, br, bc) = a(i, j) * b;
    }
  }
  return out;
}

/// Reduced operator on the kept factor of a (d1 x d2)-dimensional product space.
template <typename Derived>
auto partial_trace(const Eigen::MatrixBase<Derived>& m, Index d1, Index d2, Factor keep) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(m, "partial_trace");
  if (d1 <= 0 || d2 <= 0 || m.rows() != d1 * d2) {
    throw DimensionError("partial_trace: dim " + std::to_string(m.rows()) + " != " + std::to_string(d1) +
                         "*" + std::to_string(d2));
  }
  using Out = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (keep == Factor::first) {
    Out out = Out::Zero(d1, d1);
    for (Index i = 0; i < d1; ++i)
      for (Index j = 0; j < d1; ++j)
        out(i, j) = m.block(i * d2, j * d2, d2, d2).trace();
    return out;
  }
  Out out = Out::Zero(d2, d2);
  for (Index i = 0; i < d1; ++i) out += m.block(i * d2, i * d2, d2, d2);
  return out;
}

template <typename Derived>
auto singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  if (m.rows() == 0) return Eigen::Matrix<typename Eigen::NumTraits<typename Derived::Scalar>::Real, Eigen::Dynamic, 1>();
  if (m.rows() <= 16) return Eigen::JacobiSVD<Plain>(m.eval()).singularValues().eval();
  return Eigen::BDCSVD<Plain>(m.eval()).singularValues().eval();
}

/// Sum of singular values, Tr sqrt(m m^dagger).
template <typename Derived>
auto trace_norm(const Eigen::MatrixBase<Derived>& m) {
  detail::require_square(m, "trace_norm");
  return singular_values(m).sum();
}

/// Largest singular value.
template <typename Derived>
auto operator_norm(const Eigen::MatrixBase<Derived>& m) {
  detail::require_square(m, "operator_norm");
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  if (m.rows() == 0) return Real(0);
  return singular_values(m).maxCoeff();
}

template <typename Derived>
auto hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  detail::require_square(m, "hermiticity_defect");
  return operator_norm((m - m.adjoint()).eval());
}

template <typename Scalar>
struct HermitianEig {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eigenvalues; // ascending
  MatrixX<Scalar> eigenvectors;                          // orthonormal columns
};

/// Eigendecomposition of (m + m^dagger)/2. Throws InvalidArgument when the
/// Hermiticity defect exceeds symmetrize_tol * max(1, ||m||_op).
template <typename Derived>
auto hermitian_eig(const Eigen::MatrixBase<Derived>& m, double symmetrize_tol = kDefaultSymmetrizeTol) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  detail::require_square(m, "hermitian_eig");
  MatrixX<Real> sym = ((m + m.adjoint()) / Real(2)).eval();
  const Real defect = operator_norm((m - m.adjoint()).eval());
  const Real scale = std::max(Real(1), operator_norm(sym));
  if (defect > symmetrize_tol * scale) {
    throw InvalidArgument("hermitian_eig: Hermiticity defect " + std::to_string(defect) + " exceeds tolerance");
  }
  Eigen::SelfAdjointEigenSolver<MatrixX<Real>> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigensolver did not converge (dim " + std::to_string(sym.rows()) +
                         ", info " + std::to_string(static_cast<int>(solver.info())) + ")");
  }
  return HermitianEig<Real>{solver.eigenvalues(), solver.eigenvectors()};
}

/// Column-stacking vectorization.
inline ComplexVector vec(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

inline ComplexMatrix unvec(const ComplexVector& v, Index d) {
  if (v.size() != d * d) throw DimensionError("unvec: length " + std::to_string(v.size()) + " is not d^2");
  return Eigen::Map<const ComplexMatrix>(v.data(), d, d);
}

inline ComplexMatrix outer(const ComplexVector& a, const ComplexVector& b) { return a * b.adjoint(); }

inline bool all_finite(const ComplexMatrix& m) { return m.allFinite(); }

/// Result of checking the density-operator conditions.
struct CertificationReport {
  double hermiticity_defect = 0.0;
  double min_eigenvalue = 0.0;
  double trace_defect = 0.0;
  bool pass = false;
};

CertificationReport certify_density(const ComplexMatrix& m, double cert_tol = kDefaultCertTol);

/// Hermitian, positive semidefinite, unit-trace matrix, certified on construction.
class DensityOperator {
public:
  /// Throws InvalidArgument when any certification condition fails.
  explicit DensityOperator(ComplexMatrix m, double cert_tol = kDefaultCertTol);

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  Index dim() const noexcept { return matrix_.rows(); }
  double cert_tol() const noexcept { return cert_tol_; }

  static DensityOperator pure(const ComplexVector& psi, double cert_tol = kDefaultCertTol);
  static DensityOperator basis(Index d, Index k);
  static DensityOperator maximally_mixed(Index d);

private:
  ComplexMatrix matrix_;
  double cert_tol_;
};

/// Orthogonal projection. basis_indices is populated when the projection is
/// diagonal in the working basis.
class Projection {
public:
  Projection() = default;
  explicit Projection(ComplexMatrix m, double tol = 1e-10);
  static Projection onto_basis(Index d, std::vector<Index> indices);

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const std::vector<Index>& basis_indices() const noexcept { return basis_indices_; }
  bool is_diagonal() const noexcept { return diagonal_; }
  Index dim() const noexcept { return matrix_.rows(); }
  Index rank() const;

private:
  ComplexMatrix matrix_;
  std::vector<Index> basis_indices_;
  bool diagonal_ = false;
};

} // namespace qfix
