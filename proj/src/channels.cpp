#include "qfix/channels.hpp"

#include <cmath>
#include <string>

namespace qfix {

namespace {

void require_dim(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": dimension " + std::to_string(got) + ", expected " +
                         std::to_string(expected));
  }
}

Index validated_dim(const KrausChannel& k) {
  if (k.dim <= 0 || k.kraus.empty()) throw InvalidArgument("KrausChannel: needs dim > 0 and at least one operator");
  for (const auto& op : k.kraus) {
    if (op.rows() != k.dim || op.cols() != k.dim) throw DimensionError("KrausChannel: operator shape mismatch");
    if (!op.allFinite()) throw InvalidArgument("KrausChannel: non-finite entry");
  }
  return k.dim;
}

Index validated_dim(const SuperoperatorMatrix& s) {
  if (s.dim <= 0 || s.matrix.rows() != s.dim * s.dim || s.matrix.cols() != s.dim * s.dim) {
    throw DimensionError("SuperoperatorMatrix: matrix must be dim^2 x dim^2");
  }
  if (!s.matrix.allFinite()) throw InvalidArgument("SuperoperatorMatrix: non-finite entry");
  return s.dim;
}

Index validated_dim(const StinespringChannel& s) {
  if (s.env_dim <= 0 || s.sys_dim <= 0) throw DimensionError("StinespringChannel: non-positive dimension");
  const Index n = s.env_dim * s.sys_dim;
  if (s.u.rows() != n || s.u.cols() != n) throw DimensionError("StinespringChannel: u must be (env*sys)-dimensional");
  if (s.rho_env.dim() != s.env_dim) throw DimensionError("StinespringChannel: rho_env dimension mismatch");
  if (unitarity_defect(s.u) > 1e-10) throw InvalidArgument("StinespringChannel: u is not unitary");
  return s.sys_dim;
}

} // namespace

Channel::Channel(KrausChannel k) : dim_(validated_dim(k)) { repr_ = std::move(k); }
Channel::Channel(SuperoperatorMatrix s) : dim_(validated_dim(s)) { repr_ = std::move(s); }
Channel::Channel(StinespringChannel s) : repr_(std::move(s)), dim_(validated_dim(std::get<StinespringChannel>(repr_))) {}

const char* Channel::repr_name() const noexcept {
  if (is_kraus()) return "kraus";
  if (is_superop()) return "superop";
  return "stinespring";
}

ComplexMatrix matrix_unit(Index d, Index k, Index l) {
  ComplexMatrix e = ComplexMatrix::Zero(d, d);
  e(k, l) = 1.0;
  return e;
}

double unitarity_defect(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return operator_norm((u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).eval());
}

ComplexMatrix apply(const KrausChannel& c, const ComplexMatrix& rho) {
  require_dim(c.dim, rho.rows(), "apply");
  require_dim(c.dim, rho.cols(), "apply");
  ComplexMatrix out = ComplexMatrix::Zero(c.dim, c.dim);
  for (const auto& k : c.kraus) out.noalias() += k * rho * k.adjoint();
  return out;
}

ComplexMatrix apply(const SuperoperatorMatrix& c, const ComplexMatrix& rho) {
  require_dim(c.dim, rho.rows(), "apply");
  require_dim(c.dim, rho.cols(), "apply");
  const ComplexVector out = c.matrix * vec(rho);
  return unvec(out, c.dim);
}

ComplexMatrix apply(const StinespringChannel& c, const ComplexMatrix& rho) {
  require_dim(c.sys_dim, rho.rows(), "apply");
  require_dim(c.sys_dim, rho.cols(), "apply");
  const ComplexMatrix joint = c.u * tensor(c.rho_env.matrix(), rho) * c.u.adjoint();
  return partial_trace(joint, c.env_dim, c.sys_dim, Factor::second);
}

ComplexMatrix apply(const Channel& c, const ComplexMatrix& rho) {
  return std::visit([&](const auto& r) { return qfix::apply(r, rho); }, c.representation());
}

SuperoperatorMatrix kraus_to_superop(const KrausChannel& c) {
  const Index d2 = c.dim * c.dim;
  SuperoperatorMatrix s{c.dim, ComplexMatrix::Zero(d2, d2)};
  for (const auto& k : c.kraus) s.matrix += tensor(k.conjugate(), k);
  return s;
}

KrausChannel stinespring_to_kraus(const StinespringChannel& s, double drop_tol) {
  const auto eig = hermitian_eig(s.rho_env.matrix());
  const Index e = s.env_dim, d = s.sys_dim;
  KrausChannel out{d, {}};
  for (Index k = 0; k < e; ++k) {
    const double p = eig.eigenvalues(k);
    if (p < drop_tol) continue;
    const ComplexVector f = eig.eigenvectors.col(k);
    const double w = std::sqrt(p);
    for (Index j = 0; j < e; ++j) {
      ComplexMatrix kj = ComplexMatrix::Zero(d, d);
      for (Index l = 0; l < e; ++l) kj += f(l) * s.u.block(j * d, l * d, d, d);
      out.kraus.push_back(w * kj);
    }
  }
  if (out.kraus.empty()) throw InvalidArgument("stinespring_to_kraus: rho_env has no weight above drop_tol");
  return out;
}

SuperoperatorMatrix to_superop(const Channel& c) {
  if (c.is_superop()) return c.superop();
  if (c.is_kraus()) return kraus_to_superop(c.kraus());
  return kraus_to_superop(stinespring_to_kraus(c.stinespring()));
}

ChoiMatrix choi(const Channel& c) {
  const Index d = c.dim();
  ChoiMatrix out{d, ComplexMatrix::Zero(d * d, d * d)};
  if (!c.is_superop()) {
    const KrausChannel k = c.is_kraus() ? c.kraus() : stinespring_to_kraus(c.stinespring());
    for (const auto& op : k.kraus) {
      // w[a*d + i] = K(a, i)
      ComplexVector w(d * d);
      for (Index a = 0; a < d; ++a)
        for (Index i = 0; i < d; ++i) w(a * d + i) = op(a, i);
      out.matrix.noalias() += w * w.adjoint();
    }
    return out;
  }
  const auto& m = c.superop().matrix;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      const ComplexMatrix image = unvec(m.col(i + j * d), d);
      for (Index a = 0; a < d; ++a)
        for (Index b = 0; b < d; ++b) out.matrix(a * d + i, b * d + j) = image(a, b);
    }
  return out;
}

KrausChannel choi_to_kraus(const ChoiMatrix& c, double drop_tol, double neg_tol) {
  const Index d = c.dim;
  const auto eig = hermitian_eig(c.matrix);
  if (eig.eigenvalues(0) < -neg_tol) {
    throw InvalidArgument("choi_to_kraus: Choi matrix has eigenvalue " + std::to_string(eig.eigenvalues(0)));
  }
  KrausChannel out{d, {}};
  for (Index k = 0; k < d * d; ++k) {
    const double lambda = eig.eigenvalues(k);
    if (lambda < drop_tol) continue;
    ComplexMatrix op(d, d);
    for (Index a = 0; a < d; ++a)
      for (Index i = 0; i < d; ++i) op(a, i) = eig.eigenvectors(a * d + i, k);
    out.kraus.push_back(std::sqrt(lambda) * op);
  }
  if (out.kraus.empty()) throw InvalidArgument("choi_to_kraus: zero map");
  return out;
}

double trace_preservation_defect(const Channel& c) {
  const Index d = c.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  if (c.is_kraus()) {
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    for (const auto& k : c.kraus().kraus) sum.noalias() += k.adjoint() * k;
    return operator_norm((sum - id).eval());
  }
  const SuperoperatorMatrix s = to_superop(c);
  const ComplexMatrix dual = unvec(s.matrix.adjoint() * vec(id), d);
  return operator_norm((dual - id).eval());
}

CptpReport verify_cptp(const Channel& c, double tol) {
  CptpReport r;
  r.tol = tol;
  r.trace_preserving_defect = trace_preservation_defect(c);
  const ChoiMatrix ch = choi(c);
  r.choi_hermiticity_defect = hermiticity_defect(ch.matrix);
  const ComplexMatrix sym = (ch.matrix + ch.matrix.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("verify_cptp: Choi eigensolver did not converge");
  r.choi_min_eigenvalue = solver.eigenvalues().minCoeff();
  r.pass = r.trace_preserving_defect <= tol && r.choi_min_eigenvalue >= -tol && r.choi_hermiticity_defect <= tol;
  return r;
}

KrausChannel make_kraus_channel(std::vector<ComplexMatrix> kraus, double tol) {
  if (kraus.empty()) throw InvalidArgument("make_kraus_channel: empty Kraus list");
  KrausChannel k{kraus.front().rows(), std::move(kraus)};
  const Channel c(k);
  const double defect = trace_preservation_defect(c);
  if (defect > tol) {
    throw InvalidArgument("make_kraus_channel: completeness defect " + std::to_string(defect) + " exceeds tolerance");
  }
  return k;
}

DeutschChannel deutsch_channel(const ComplexMatrix& u, const DensityOperator& rho_in, Index env_dim, Index sys_dim,
                               double kraus_drop_tol) {
  if (env_dim <= 0 || sys_dim <= 0) throw DimensionError("deutsch_channel: non-positive dimension");
  if (u.rows() != env_dim * sys_dim || u.cols() != env_dim * sys_dim) {
    throw DimensionError("deutsch_channel: dim(u) != env_dim * sys_dim");
  }
  if (rho_in.dim() != env_dim) throw DimensionError("deutsch_channel: rho_in dimension != env_dim");
  if (unitarity_defect(u) > 1e-10) {
    throw InvalidArgument("deutsch_channel: u is not unitary (defect " + std::to_string(unitarity_defect(u)) + ")");
  }
  StinespringChannel s{env_dim, sys_dim, u, rho_in};
  KrausChannel k = stinespring_to_kraus(s, kraus_drop_tol);
  return {std::move(s), std::move(k)};
}

KrausChannel identity_channel(Index d) {
  if (d <= 0) throw DimensionError("identity_channel: non-positive dimension");
  return {d, {ComplexMatrix::Identity(d, d)}};
}

KrausChannel unitary_channel(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) throw DimensionError("unitary_channel: u not square");
  if (unitarity_defect(u) > 1e-10) throw InvalidArgument("unitary_channel: u is not unitary");
  return {u.rows(), {u}};
}

KrausChannel truncated_shift_channel(Index d) {
  if (d < 2) throw InvalidArgument("truncated_shift_channel: need d >= 2");
  ComplexMatrix v = ComplexMatrix::Zero(d, d);
  for (Index i = 0; i + 1 < d; ++i) v(i + 1, i) = 1.0;
  return {d, {v, matrix_unit(d, d - 1, d - 1)}};
}

SuperoperatorMatrix transpose_map(Index d) {
  if (d <= 0) throw DimensionError("transpose_map: non-positive dimension");
  SuperoperatorMatrix s{d, ComplexMatrix::Zero(d * d, d * d)};
  // vec(X^T)[j + i d] = X(i, j) = vec(X)[i + j d]
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) s.matrix(j + i * d, i + j * d) = 1.0;
  return s;
}

Channel compose(const Channel& outer, const Channel& inner) {
  if (outer.dim() != inner.dim()) throw DimensionError("compose: dimension mismatch");
  return Channel(SuperoperatorMatrix{outer.dim(), to_superop(outer).matrix * to_superop(inner).matrix});
}

} // namespace qfix
