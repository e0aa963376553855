#include "qfix/ctc.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace qfix {

const char* to_string(SpliceRule r) noexcept {
  return r == SpliceRule::vacuum_splice ? "vacuum_splice" : "recycle_splice";
}

void CtcScenario::validate() const {
  if (h_in_dim <= 0) throw DimensionError("CtcScenario: h_in_dim must be positive");
  if (u.rows() != full_dim() || u.cols() != full_dim()) throw DimensionError("CtcScenario: dim(u) != h_in_dim * dim(F)");
  if (rho_t1_minus.dim() != full_dim()) throw DimensionError("CtcScenario: rho_t1_minus has the wrong dimension");
  if (unitarity_defect(u) > 1e-10) throw InvalidArgument("CtcScenario: u is not unitary");
}

DensityOperator derive_rho_in(const CtcScenario& scenario) {
  scenario.validate();
  ComplexMatrix r = partial_trace(scenario.rho_t1_minus.matrix(), scenario.h_in_dim, scenario.fock_dim(), Factor::first);
  return DensityOperator((r + r.adjoint()) / 2.0);
}

Channel build_ctc_channel(const CtcScenario& scenario) {
  const DensityOperator rho_in = derive_rho_in(scenario);
  return Channel(deutsch_channel(scenario.u, rho_in, scenario.h_in_dim, scenario.fock_dim()).stinespring);
}

ConsistentHistory solve_history(const CtcScenario& scenario, const SpectralOptions& opts) {
  const DensityOperator rho_in = derive_rho_in(scenario);
  const Index din = scenario.h_in_dim, df = scenario.fock_dim();
  const DeutschChannel dc = deutsch_channel(scenario.u, rho_in, din, df);
  const Channel s(dc.kraus);

  FixedPointResult fp = spectral_fixed_point(s, opts);
  const std::int64_t mult =
      fp.method == FixedPointMethod::spectral ? fp.iterations_or_multiplicity : fixed_point_multiplicity(s, opts.eig_cluster_tol);

  const ComplexMatrix t1_plus = tensor(rho_in.matrix(), fp.rho.matrix());
  ComplexMatrix t2_minus = scenario.u * t1_plus * scenario.u.adjoint();
  t2_minus = (t2_minus + t2_minus.adjoint()) / 2.0;

  const ComplexMatrix rho2 = partial_trace(t2_minus, din, df, Factor::second);
  const double consistency = trace_norm((rho2 - fp.rho.matrix()).eval());

  const ComplexMatrix out_in = partial_trace(t2_minus, din, df, Factor::first);
  ComplexMatrix f_part;
  if (scenario.post_t2_rule == SpliceRule::vacuum_splice) {
    f_part = matrix_unit(df, scenario.fock.vacuum_index(), scenario.fock.vacuum_index());
  } else {
    f_part = partial_trace(scenario.rho_t1_minus.matrix(), din, df, Factor::second);
  }
  ComplexMatrix t2_plus = tensor(out_in, f_part);
  t2_plus = (t2_plus + t2_plus.adjoint()) / 2.0;

  return ConsistentHistory{rho_in,
                           fp.rho,
                           DensityOperator(std::move(t2_minus)),
                           DensityOperator(std::move(t2_plus)),
                           consistency,
                           mult,
                           fp.method};
}

ComplexMatrix cylinder_evolution(const ComplexMatrix& h, double t) {
  const auto eig = hermitian_eig(h);
  ComplexVector phases(eig.eigenvalues.size());
  for (Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(Complex(0.0, -eig.eigenvalues(i) * t));
  return eig.eigenvectors * phases.asDiagonal() * eig.eigenvectors.adjoint();
}

CylinderFixedPoints cylinder_fixed_points(const ComplexMatrix& h, double t, double phase_tol) {
  if (!(t > 0)) throw InvalidArgument("cylinder_fixed_points: period must be positive");
  const auto eig = hermitian_eig(h);
  const Index d = eig.eigenvalues.size();

  // Uniform weights on the H eigenbasis.
  DensityOperator rho = DensityOperator::maximally_mixed(d);

  const Channel s(unitary_channel(cylinder_evolution(h, t)));
  const double r = residual(s, rho);

  const double spacing = 2.0 * std::numbers::pi / t;
  std::set<std::int64_t> ks;
  for (Index i = 0; i < d; ++i) {
    const double lambda = eig.eigenvalues(i);
    const auto k = static_cast<std::int64_t>(std::llround(lambda / spacing));
    if (std::abs(lambda - spacing * static_cast<double>(k)) <= phase_tol) ks.insert(k);
  }
  return {std::move(rho), r, std::vector<std::int64_t>(ks.begin(), ks.end())};
}

ProbeReport k_invariance_probe(const Channel& s, const ConstraintSet& k, const FockSpace& f, Index samples,
                               std::uint64_t seed) {
  if (s.dim() != f.dim()) throw DimensionError("k_invariance_probe: channel does not act on the Fock factor");
  ProbeReport report;
  for (const auto& rho : sample_k(k, f, samples, seed)) {
    ProbeSample ps;
    ps.before = k_membership(rho, k).expectations;
    const auto after = k_membership(qfix::apply(s, rho.matrix()), k);
    ps.after = after.expectations;
    ps.member_after = after.member;
    if (!after.member) ++report.violations;
    for (Index i = 0; i < k.m(); ++i) report.worst_excess = std::max(report.worst_excess, ps.after(i) - k.bounds()(i));
    report.per_sample.push_back(std::move(ps));
  }
  return report;
}

} // namespace qfix
