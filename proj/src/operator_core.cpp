#include "qfix/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qfix {

CertificationReport certify_density(const ComplexMatrix& m, double cert_tol) {
  CertificationReport r;
  if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite()) {
    r.hermiticity_defect = std::numeric_limits<double>::infinity();
    r.min_eigenvalue = -std::numeric_limits<double>::infinity();
    r.trace_defect = std::numeric_limits<double>::infinity();
    return r;
  }
  r.hermiticity_defect = hermiticity_defect(m);
  const ComplexMatrix sym = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("certify_density: eigensolver did not converge");
  r.min_eigenvalue = solver.eigenvalues().minCoeff();
  r.trace_defect = std::abs(m.trace() - Complex(1.0, 0.0));
  r.pass = r.hermiticity_defect <= cert_tol && r.min_eigenvalue >= -cert_tol && r.trace_defect <= cert_tol;
  return r;
}

DensityOperator::DensityOperator(ComplexMatrix m, double cert_tol) : matrix_(std::move(m)), cert_tol_(cert_tol) {
  if (cert_tol_ < 0) throw InvalidArgument("DensityOperator: negative cert_tol");
  const auto r = certify_density(matrix_, cert_tol_);
  if (!r.pass) {
    throw InvalidArgument("DensityOperator: certification failed (hermiticity defect " +
                          std::to_string(r.hermiticity_defect) + ", min eigenvalue " +
                          std::to_string(r.min_eigenvalue) + ", trace defect " + std::to_string(r.trace_defect) +
                          ")");
  }
}

DensityOperator DensityOperator::pure(const ComplexVector& psi, double cert_tol) {
  return DensityOperator(outer(psi, psi), cert_tol);
}

DensityOperator DensityOperator::basis(Index d, Index k) {
  if (k < 0 || k >= d) throw DimensionError("DensityOperator::basis: index out of range");
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  m(k, k) = 1.0;
  return DensityOperator(std::move(m));
}

DensityOperator DensityOperator::maximally_mixed(Index d) {
  if (d <= 0) throw DimensionError("DensityOperator::maximally_mixed: non-positive dimension");
  return DensityOperator(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
}

Projection::Projection(ComplexMatrix m, double tol) : matrix_(std::move(m)) {
  detail::require_square(matrix_, "Projection");
  const double scale = std::max(1.0, operator_norm(matrix_));
  if (operator_norm((matrix_ * matrix_ - matrix_).eval()) > tol * scale ||
      hermiticity_defect(matrix_) > tol * scale) {
    throw InvalidArgument("Projection: matrix is not an orthogonal projection");
  }
  const ComplexMatrix off = matrix_ - ComplexMatrix(matrix_.diagonal().asDiagonal());
  diagonal_ = off.cwiseAbs().maxCoeff() == 0.0 || matrix_.rows() == 0;
  if (diagonal_) {
    for (Index i = 0; i < matrix_.rows(); ++i) {
      const Complex v = matrix_(i, i);
      if (v == Complex(1.0, 0.0)) {
        basis_indices_.push_back(i);
      } else if (v != Complex(0.0, 0.0)) {
        diagonal_ = false;
        basis_indices_.clear();
        break;
      }
    }
  }
}

Projection Projection::onto_basis(Index d, std::vector<Index> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  Projection p;
  p.matrix_ = ComplexMatrix::Zero(d, d);
  for (Index i : indices) {
    if (i < 0 || i >= d) throw DimensionError("Projection::onto_basis: index out of range");
    p.matrix_(i, i) = 1.0;
  }
  p.basis_indices_ = std::move(indices);
  p.diagonal_ = true;
  return p;
}

Index Projection::rank() const {
  if (diagonal_) return static_cast<Index>(basis_indices_.size());
  return static_cast<Index>(std::llround(matrix_.trace().real()));
}

} // namespace qfix
