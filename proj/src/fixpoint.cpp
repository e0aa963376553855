#include "qfix/fixpoint.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace qfix {

const char* to_string(FixedPointMethod m) noexcept {
  return m == FixedPointMethod::cesaro ? "cesaro" : "spectral";
}

double residual(const Channel& s, const ComplexMatrix& rho) {
  return trace_norm((qfix::apply(s, rho) - rho).eval());
}

ComplexMatrix cesaro_mean(const Channel& s, const ComplexMatrix& rho0, std::int64_t n) {
  if (n < 0) throw InvalidArgument("cesaro_iterate: negative iteration count");
  if (rho0.rows() != s.dim() || rho0.cols() != s.dim()) throw DimensionError("cesaro_iterate: dimension mismatch");

  // Superoperator matvec is the cheapest step for the small dims we target,
  // except for Stinespring input where the Kraus form avoids the d^2 blowup of
  // repeated partial traces.
  const Channel step = s.is_stinespring() ? Channel(stinespring_to_kraus(s.stinespring())) : s;
  ComplexMatrix current = rho0;
  ComplexMatrix sum = rho0;
  for (std::int64_t k = 1; k <= n; ++k) {
    current = qfix::apply(step, current);
    sum += current;
  }
  return sum / static_cast<double>(n + 1);
}

FixedPointResult cesaro_iterate(const Channel& s, const DensityOperator& rho0, std::int64_t n) {
  ComplexMatrix mean = cesaro_mean(s, rho0.matrix(), n);
  // Average of states; only rounding separates it from an exact state.
  mean = (mean + mean.adjoint()) / 2.0;
  DensityOperator rho(std::move(mean), std::max(rho0.cert_tol(), kDefaultCertTol));
  const double r = residual(s, rho);
  return {std::move(rho), r, FixedPointMethod::cesaro, n};
}

namespace {

Eigen::VectorXcd superop_eigenvalues(const ComplexMatrix& m) {
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("superoperator eigensolver did not converge (dim " + std::to_string(m.rows()) + ")");
  }
  return solver.eigenvalues();
}

std::int64_t count_near_one(const Eigen::VectorXcd& ev, double tol) {
  std::int64_t count = 0;
  for (Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i) - Complex(1.0, 0.0)) <= tol) ++count;
  return count;
}

} // namespace

std::int64_t fixed_point_multiplicity(const Channel& s, double tol) {
  return count_near_one(superop_eigenvalues(to_superop(s).matrix), tol);
}

ComplexMatrix repair_to_state(const ComplexMatrix& m, double* discarded) {
  const auto eig = hermitian_eig(m, 1.0);
  RealVector w = eig.eigenvalues;
  double neg = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) < 0) {
      neg += -w(i);
      w(i) = 0.0;
    }
  }
  if (discarded != nullptr) *discarded = neg;
  const double total = w.sum();
  if (!(total > 0)) throw NumericalError("repair_to_state: no positive weight");
  ComplexMatrix out = eig.eigenvectors * (w / total).cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
  return (out + out.adjoint()) / 2.0;
}

FixedPointResult spectral_fixed_point(const Channel& s, const SpectralOptions& opts) {
  if (!(opts.tol > 0)) throw InvalidArgument("spectral_fixed_point: tol must be positive");
  const Index d = s.dim();
  const ComplexMatrix m = to_superop(s).matrix;
  const std::int64_t mult = count_near_one(superop_eigenvalues(m), opts.eig_cluster_tol);
  if (mult == 0) throw NumericalError("no fixed point at this tolerance");

  // Eigenvalue 1 of a channel is semisimple, so the Cesaro limit is the
  // projection onto ker(M - I) along range(M - I): R (L^dagger R)^{-1} L^dagger
  // with R, L spanning the right and left null spaces.
  const Index n = d * d;
  const ComplexMatrix gap = m - ComplexMatrix::Identity(n, n);
  Eigen::BDCSVD<ComplexMatrix> svd(gap, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw NumericalError("spectral_fixed_point: SVD failed");
  const ComplexMatrix right = svd.matrixV().rightCols(mult);
  const ComplexMatrix left = svd.matrixU().rightCols(mult);
  const ComplexMatrix overlap = left.adjoint() * right;
  Eigen::FullPivLU<ComplexMatrix> lu(overlap);
  if (!lu.isInvertible()) throw NumericalError("spectral_fixed_point: degenerate fixed-point projector");

  const ComplexVector start = vec(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
  const ComplexVector projected = right * lu.solve(left.adjoint() * start);
  ComplexMatrix candidate = unvec(projected, d);

  double discarded = 0.0;
  bool ok = true;
  try {
    candidate = repair_to_state(candidate, &discarded);
  } catch (const Error&) {
    ok = false;
  }
  if (ok && discarded <= opts.tol) {
    DensityOperator rho(std::move(candidate));
    const double r = residual(s, rho);
    if (r <= opts.tol) return {std::move(rho), r, FixedPointMethod::spectral, mult};
  }

  const auto n_iter = static_cast<std::int64_t>(std::ceil(2.0 / opts.tol));
  return cesaro_iterate(s, DensityOperator::maximally_mixed(d), n_iter);
}

} // namespace qfix
