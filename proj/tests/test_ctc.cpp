#include "qfix/ctc.hpp"
#include "qfix/random.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

using namespace qfix;

namespace {

FockSpace qubit_fock() { return build_fock({1.0}, Statistics::boson, 1, 1.0); } // dim 2
FockSpace four_fock() { return build_fock({1.0, 2.0}, Statistics::boson, 2, 2.0); } // dim 4

ComplexMatrix swap_gate(Index d) {
  ComplexMatrix s = ComplexMatrix::Zero(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) s(j * d + i, i * d + j) = 1.0;
  return s;
}

CtcScenario random_scenario(Index din, FockSpace f, SpliceRule rule, Rng& rng) {
  const Index d = din * f.dim();
  ComplexMatrix u = random_unitary(d, rng);
  DensityOperator rho(random_density_matrix(d, rng));
  return CtcScenario{din, std::move(f), std::move(u), std::move(rho), rule};
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// Unitary mixing basis states only within groups sharing a label.
ComplexMatrix block_unitary(const std::vector<std::pair<int, long long>>& labels, Rng& rng) {
  const Index d = static_cast<Index>(labels.size());
  std::map<std::pair<int, long long>, std::vector<Index>> groups;
  for (Index i = 0; i < d; ++i) groups[labels[static_cast<std::size_t>(i)]].push_back(i);
  ComplexMatrix u = ComplexMatrix::Zero(d, d);
  for (const auto& [key, idx] : groups) {
    const ComplexMatrix block = random_unitary(static_cast<Index>(idx.size()), rng);
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) u(idx[a], idx[b]) = block(static_cast<Index>(a), static_cast<Index>(b));
  }
  return u;
}

} // namespace

TEST_CASE("CtcScenario validation") {
  Rng rng(51);
  auto s = random_scenario(2, qubit_fock(), SpliceRule::vacuum_splice, rng);
  CHECK_NOTHROW(s.validate());
  CHECK(s.full_dim() == 4);

  auto bad_u = s;
  bad_u.u(0, 0) += 0.1;
  CHECK_THROWS_AS(bad_u.validate(), InvalidArgument);

  auto bad_dim = s;
  bad_dim.h_in_dim = 3;
  CHECK_THROWS_AS(bad_dim.validate(), DimensionError);
}

TEST_CASE("derive_rho_in") {
  Rng rng(52);
  const ComplexMatrix ra = random_density_matrix(2, rng), rb = random_density_matrix(2, rng);
  CtcScenario product{2, qubit_fock(), ComplexMatrix::Identity(4, 4), DensityOperator(tensor(ra, rb)),
                      SpliceRule::vacuum_splice};
  CHECK(max_abs(derive_rho_in(product).matrix() - ra) < 1e-12);

  ComplexVector phi = ComplexVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  CtcScenario bell{2, qubit_fock(), ComplexMatrix::Identity(4, 4), DensityOperator::pure(phi), SpliceRule::vacuum_splice};
  CHECK(max_abs(derive_rho_in(bell).matrix() - ComplexMatrix::Identity(2, 2) / 2.0) < 1e-15);

  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_scenario(3, four_fock(), SpliceRule::vacuum_splice, rng);
    const ComplexMatrix& full = s.rho_t1_minus.matrix();
    ComplexMatrix oracle = ComplexMatrix::Zero(3, 3);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j)
        for (Index k = 0; k < 4; ++k) oracle(i, j) += full(i * 4 + k, j * 4 + k);
    const ComplexMatrix r = derive_rho_in(s).matrix();
    CHECK(max_abs(r - oracle) < 1e-12);
    CHECK(std::abs(r.trace() - 1.0) < 1e-12);
  }
}

TEST_CASE("build_ctc_channel") {
  Rng rng(53);
  SUBCASE("u = I gives the identity channel") {
    auto s = random_scenario(2, four_fock(), SpliceRule::vacuum_splice, rng);
    s.u = ComplexMatrix::Identity(8, 8);
    const Channel c = build_ctc_channel(s);
    const ComplexMatrix rho = random_density_matrix(4, rng);
    CHECK(max_abs(qfix::apply(c, rho) - rho) < 1e-12);
  }

  SUBCASE("u = SWAP is constant at rho_in") {
    auto s = random_scenario(2, qubit_fock(), SpliceRule::vacuum_splice, rng);
    s.u = swap_gate(2);
    const Channel c = build_ctc_channel(s);
    const ComplexMatrix rin = derive_rho_in(s).matrix();
    for (int trial = 0; trial < 5; ++trial) CHECK(max_abs(qfix::apply(c, random_density_matrix(2, rng)) - rin) < 1e-12);
  }

  SUBCASE("random scenarios are CPTP") {
    for (int trial = 0; trial < 10; ++trial) {
      const auto s = random_scenario(2, four_fock(), SpliceRule::vacuum_splice, rng);
      const auto report = verify_cptp(build_ctc_channel(s), 1e-8);
      CHECK(report.pass);
      CHECK(report.trace_preserving_defect <= 1e-10);
    }
  }
}

TEST_CASE("solve_history") {
  Rng rng(54);
  SUBCASE("u = I") {
    auto s = random_scenario(2, four_fock(), SpliceRule::vacuum_splice, rng);
    s.u = ComplexMatrix::Identity(8, 8);
    const auto h = solve_history(s);
    CHECK(h.consistency_residual < 1e-10);
    CHECK(h.multiplicity == 16);
    CHECK(max_abs(h.rho1.matrix() - ComplexMatrix::Identity(4, 4) / 4.0) < 1e-10);
  }

  SUBCASE("u = SWAP: rho_1 = rho_in") {
    auto s = random_scenario(2, qubit_fock(), SpliceRule::recycle_splice, rng);
    s.u = swap_gate(2);
    const auto h = solve_history(s);
    CHECK(h.multiplicity == 1);
    CHECK(max_abs(h.rho1.matrix() - h.rho_in.matrix()) < 1e-10);
  }

  SUBCASE("consistency chain and splice rules") {
    for (int trial = 0; trial < 10; ++trial) {
      for (auto rule : {SpliceRule::vacuum_splice, SpliceRule::recycle_splice}) {
        const auto s = random_scenario(2, qubit_fock(), rule, rng);
        const auto h = solve_history(s);
        CHECK(h.consistency_residual <= 1e-8);
        CHECK(std::abs(h.consistency_residual - residual(build_ctc_channel(s), h.rho1)) <= 1e-10);

        const ComplexMatrix t2 = s.u * tensor(h.rho_in.matrix(), h.rho1.matrix()) * s.u.adjoint();
        CHECK(max_abs(t2 - h.rho_t2_minus.matrix()) < 1e-12);
        CHECK(max_abs(partial_trace(t2, 2, 2, Factor::second) - h.rho1.matrix()) <= 1e-8);

        CHECK(std::abs(h.rho_t2_plus.matrix().trace() - 1.0) < 1e-10);
        const ComplexMatrix f_after = partial_trace(h.rho_t2_plus.matrix(), 2, 2, Factor::second);
        const ComplexMatrix in_after = partial_trace(h.rho_t2_plus.matrix(), 2, 2, Factor::first);
        CHECK(max_abs(in_after - partial_trace(t2, 2, 2, Factor::first)) < 1e-12);
        if (rule == SpliceRule::vacuum_splice) {
          CHECK(std::abs(f_after(0, 0) - 1.0) < 1e-12);
        } else {
          CHECK(max_abs(f_after - partial_trace(s.rho_t1_minus.matrix(), 2, 2, Factor::second)) < 1e-12);
        }
      }
    }
  }

  SUBCASE("non-unique fixed point: multiplicity surfaced, Cesaro representative returned") {
    // The F factor controls a unitary on the in factor, so every F-diagonal state is fixed.
    const Index din = 2, df = 4;
    ComplexMatrix u = ComplexMatrix::Zero(din * df, din * df);
    std::vector<ComplexMatrix> v;
    for (Index f = 0; f < df; ++f) v.push_back(random_unitary(din, rng));
    for (Index a = 0; a < din; ++a)
      for (Index b = 0; b < din; ++b)
        for (Index f = 0; f < df; ++f) u(a * df + f, b * df + f) = v[static_cast<std::size_t>(f)](a, b);
    CtcScenario s{din, four_fock(), u, DensityOperator(random_density_matrix(din * df, rng)), SpliceRule::vacuum_splice};
    const auto h = solve_history(s);
    CHECK(h.multiplicity >= df);
    CHECK(h.consistency_residual < 1e-10);
    const auto ces = cesaro_iterate(build_ctc_channel(s), DensityOperator::maximally_mixed(df), 20000);
    CHECK(trace_norm((h.rho1.matrix() - ces.rho.matrix()).eval()) < 1e-3);
  }
}

TEST_CASE("cylinder_fixed_points") {
  const double t = 1.5;
  ComplexMatrix resonant = ComplexMatrix::Zero(2, 2);
  resonant(1, 1) = 2.0 * std::numbers::pi / t;
  const auto r = cylinder_fixed_points(resonant, t);
  CHECK(r.resonant_k == std::vector<std::int64_t>{0, 1});
  CHECK(max_abs(cylinder_evolution(resonant, t) - ComplexMatrix::Identity(2, 2)) < 1e-12);

  ComplexMatrix plain = ComplexMatrix::Zero(2, 2);
  plain(1, 1) = 1.0;
  const auto p = cylinder_fixed_points(plain, 1.0);
  CHECK(p.resonant_k == std::vector<std::int64_t>{0});
  CHECK(p.residual < 1e-10);
  const Channel s(unitary_channel(cylinder_evolution(plain, 1.0)));
  const auto fp = cesaro_iterate(s, DensityOperator::pure(ComplexVector::Constant(2, 1.0 / std::sqrt(2.0))), 5000);
  CHECK(std::abs(fp.rho.matrix()(0, 1)) < 1e-3);

  Rng rng(55);
  const ComplexMatrix h = random_hermitian(5, rng);
  const auto eig = hermitian_eig(h);
  const Channel sh(unitary_channel(cylinder_evolution(h, 0.7)));
  CHECK(cylinder_fixed_points(h, 0.7).residual < 1e-10);
  for (int trial = 0; trial < 20; ++trial) {
    RealVector w = RealVector::NullaryExpr(5, [&] { return uniform_real(0.0, 1.0, rng); });
    w /= w.sum();
    const ComplexMatrix rho = eig.eigenvectors * w.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
    CHECK(residual(sh, rho) < 1e-10);
  }

  CHECK_THROWS_AS(cylinder_fixed_points(plain, 0.0), InvalidArgument);
}

TEST_CASE("k_invariance_probe") {
  Rng rng(56);
  const FockSpace f = build_fock({1.0, 2.0}, Statistics::boson, 3, 4.0);
  const auto k = ConstraintSet::number_energy(f, 1.0, 1.5);

  SUBCASE("identity") {
    const auto r = k_invariance_probe(Channel(identity_channel(f.dim())), k, f, 30, 1);
    CHECK(r.violations == 0);
    CHECK(r.per_sample.size() == 30);
  }

  SUBCASE("number-conserving coupling with a vacuum input") {
    const FockSpace in = build_fock({1.0, 2.0}, Statistics::boson, 1, 2.0);
    std::vector<std::pair<int, long long>> labels;
    for (const auto& a : in.basis())
      for (const auto& b : f.basis()) labels.emplace_back(a.n + b.n, std::llround((a.e + b.e) * 1e6));
    const ComplexMatrix u = block_unitary(labels, rng);
    const Index d = in.dim() * f.dim();
    CtcScenario s{in.dim(), f, u, DensityOperator::basis(d, 0), SpliceRule::vacuum_splice};
    const auto r = k_invariance_probe(build_ctc_channel(s), k, f, 50, 2);
    CHECK(r.violations == 0);
    for (const auto& ps : r.per_sample) {
      CHECK(ps.member_after);
      for (Index i = 0; i < 2; ++i) CHECK(ps.after(i) <= ps.before(i) + 1e-10);
    }
  }

  SUBCASE("particle injection") {
    Index top = 0;
    for (Index i = 0; i < f.dim(); ++i)
      if (f.basis()[static_cast<std::size_t>(i)].n == 3) top = i;
    ComplexMatrix v = ComplexMatrix::Identity(f.dim(), f.dim());
    v(0, 0) = v(top, top) = 0.0;
    v(0, top) = v(top, 0) = 1.0;
    const auto r = k_invariance_probe(Channel(unitary_channel(v)), k, f, 50, 3);
    CHECK(r.violations > 0);
    CHECK(r.worst_excess > 0.0);
  }

  SUBCASE("determinism and dimension check") {
    const Channel c(unitary_channel(random_unitary(f.dim(), rng)));
    const auto a = k_invariance_probe(c, k, f, 20, 9), b = k_invariance_probe(c, k, f, 20, 9);
    CHECK(a.violations == b.violations);
    CHECK(a.worst_excess == b.worst_excess);
    CHECK_THROWS_AS(k_invariance_probe(Channel(identity_channel(3)), k, f, 5, 1), DimensionError);
  }
}
