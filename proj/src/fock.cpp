#include "qfix/fock.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace qfix {

namespace {

// Energy comparisons allow for rounding in sums of mode energies.
bool energy_within(double e, double bound) { return e <= bound + 1e-12 * std::max(1.0, std::abs(bound)); }

} // namespace

const char* to_string(Statistics s) noexcept { return s == Statistics::boson ? "boson" : "fermion"; }

FockSpace::FockSpace(std::vector<double> mode_energies, Statistics statistics, int n_max, double e_max,
                     Index basis_cap)
    : energies_(std::move(mode_energies)), statistics_(statistics), n_max_(n_max), e_max_(e_max) {
  if (energies_.empty()) throw InvalidArgument("FockSpace: need at least one mode");
  for (std::size_t i = 0; i < energies_.size(); ++i) {
    if (!(energies_[i] > 0) || !std::isfinite(energies_[i])) throw InvalidArgument("FockSpace: mode energies must be positive");
    if (i > 0 && energies_[i] < energies_[i - 1]) throw InvalidArgument("FockSpace: mode energies must be ascending");
  }
  if (n_max < 0 || !(e_max >= 0) || !std::isfinite(e_max)) throw InvalidArgument("FockSpace: negative cutoff");

  const int modes = static_cast<int>(energies_.size());
  FockState current{std::vector<int>(energies_.size(), 0), 0, 0.0};
  std::function<void(int)> recurse = [&](int mode) {
    if (mode == modes) {
      if (static_cast<Index>(basis_.size()) >= basis_cap) {
        throw InvalidArgument("FockSpace: basis exceeds cap of " + std::to_string(basis_cap) +
                              " states; reduce n_max, e_max or the number of modes");
      }
      basis_.push_back(current);
      return;
    }
    const int max_occ = statistics_ == Statistics::fermion ? 1 : n_max_;
    for (int occ = 0; occ <= max_occ; ++occ) {
      const int n = current.n + occ;
      const double e = current.e + occ * energies_[static_cast<std::size_t>(mode)];
      if (n > n_max_ || !energy_within(e, e_max_)) break;
      const FockState saved = current;
      current.occupations[static_cast<std::size_t>(mode)] = occ;
      current.n = n;
      current.e = e;
      recurse(mode + 1);
      current = saved;
    }
  };
  recurse(0);
}

FockSpace build_fock(std::vector<double> mode_energies, Statistics statistics, int n_max, double e_max,
                     Index basis_cap) {
  return FockSpace(std::move(mode_energies), statistics, n_max, e_max, basis_cap);
}

ComplexMatrix number_operator(const FockSpace& f) {
  ComplexMatrix m = ComplexMatrix::Zero(f.dim(), f.dim());
  for (Index i = 0; i < f.dim(); ++i) m(i, i) = static_cast<double>(f.basis()[static_cast<std::size_t>(i)].n);
  return m;
}

ComplexMatrix energy_operator(const FockSpace& f) {
  ComplexMatrix m = ComplexMatrix::Zero(f.dim(), f.dim());
  for (Index i = 0; i < f.dim(); ++i) m(i, i) = f.basis()[static_cast<std::size_t>(i)].e;
  return m;
}

Index spectral_subspace_dim(const FockSpace& f, double a1, double a2) {
  if (a1 < 0 || a2 < 0) throw InvalidArgument("spectral_subspace_dim: bounds must be non-negative");
  return static_cast<Index>(std::count_if(f.basis().begin(), f.basis().end(), [&](const FockState& s) {
    return s.n <= a1 && energy_within(s.e, a2);
  }));
}

double combinatorial_rank_bound(const FockSpace& f, double a1, double a2) {
  const auto levels = static_cast<double>(
      std::count_if(f.mode_energies().begin(), f.mode_energies().end(), [&](double e) { return energy_within(e, a2); }));
  double sum = 0.0;
  for (int n = 0; n <= static_cast<int>(std::floor(a1)); ++n) sum += std::pow(levels, n);
  return sum;
}

ConstraintSet::ConstraintSet(std::vector<RealVector> diagonals, RealVector bounds)
    : diagonals_(std::move(diagonals)), bounds_(std::move(bounds)) {
  if (diagonals_.empty()) throw InvalidArgument("ConstraintSet: need at least one observable");
  if (static_cast<Index>(diagonals_.size()) != bounds_.size()) {
    throw DimensionError("ConstraintSet: one bound per observable required");
  }
  const Index d = diagonals_.front().size();
  for (const auto& diag : diagonals_) {
    if (diag.size() != d) throw DimensionError("ConstraintSet: observables differ in dimension");
    if (!diag.allFinite() || diag.minCoeff() < 0) throw InvalidArgument("ConstraintSet: observables must be positive");
  }
  for (Index i = 0; i < bounds_.size(); ++i)
    if (!(bounds_(i) > 0) || !std::isfinite(bounds_(i))) throw InvalidArgument("ConstraintSet: bounds must be positive");
}

ConstraintSet ConstraintSet::number_energy(const FockSpace& f, double n_bound, double e_bound) {
  RealVector n(f.dim()), e(f.dim());
  for (Index i = 0; i < f.dim(); ++i) {
    n(i) = f.basis()[static_cast<std::size_t>(i)].n;
    e(i) = f.basis()[static_cast<std::size_t>(i)].e;
  }
  return ConstraintSet({n, e}, Eigen::Vector2d(n_bound, e_bound));
}

ComplexMatrix ConstraintSet::observable(Index i) const {
  return diagonals_.at(static_cast<std::size_t>(i)).cast<Complex>().asDiagonal();
}

PvmGrid ConstraintSet::grid() const {
  PvmGrid g;
  g.points.reserve(static_cast<std::size_t>(dim()));
  for (Index j = 0; j < dim(); ++j) {
    RealVector x(m());
    for (Index i = 0; i < m(); ++i) x(i) = diagonals_[static_cast<std::size_t>(i)](j);
    g.points.push_back(std::move(x));
  }
  return g;
}

std::vector<Index> ConstraintSet::box_indices() const {
  std::vector<Index> out;
  for (Index j = 0; j < dim(); ++j) {
    bool inside = true;
    for (Index i = 0; i < m() && inside; ++i) inside = energy_within(diagonals_[static_cast<std::size_t>(i)](j), bounds_(i));
    if (inside) out.push_back(j);
  }
  return out;
}

MembershipResult k_membership(const ComplexMatrix& rho, const ConstraintSet& k, double k_tol) {
  if (rho.rows() != k.dim() || rho.cols() != k.dim()) throw DimensionError("k_membership: dimension mismatch");
  MembershipResult r;
  r.expectations.resize(k.m());
  const RealVector diag = rho.diagonal().real();
  r.member = true;
  for (Index i = 0; i < k.m(); ++i) {
    r.expectations(i) = diag.dot(k.diagonals()[static_cast<std::size_t>(i)]);
    if (r.expectations(i) < -k_tol || r.expectations(i) > k.bounds()(i) + k_tol) r.member = false;
  }
  return r;
}

bool convexity_check(const DensityOperator& rho_a, const DensityOperator& rho_b, double alpha, const ConstraintSet& k,
                     double k_tol) {
  if (alpha < 0 || alpha > 1) throw InvalidArgument("convexity_check: alpha outside [0, 1]");
  const auto ea = k_membership(rho_a, k, k_tol);
  const auto eb = k_membership(rho_b, k, k_tol);
  const ComplexMatrix mix = alpha * rho_a.matrix() + (1.0 - alpha) * rho_b.matrix();
  const auto em = k_membership(mix, k, k_tol);
  const RealVector expected = alpha * ea.expectations + (1.0 - alpha) * eb.expectations;
  return em.member && (em.expectations - expected).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, expected.cwiseAbs().maxCoeff());
}

std::int64_t cutoff_for(Index m, double b, double epsilon) {
  if (!(epsilon > 0)) throw InvalidArgument("cutoff_for: epsilon must be positive");
  if (m <= 0 || !(b > 0)) throw InvalidArgument("cutoff_for: need m >= 1 and b > 0");
  const double numerator = 4.0 * static_cast<double>(m) * b;
  const double eps2 = epsilon * epsilon;
  std::int64_t n = 1;
  while (!(numerator / static_cast<double>(n) < eps2)) ++n;
  return n;
}

TruncationProjection truncation_projection(const ConstraintSet& k, const PvmGrid& grid, double epsilon) {
  if (!(epsilon > 0)) throw InvalidArgument("truncation_projection: epsilon must be positive");
  if (grid.m() != k.m() || static_cast<Index>(grid.points.size()) != k.dim()) {
    throw DimensionError("truncation_projection: grid does not match constraint set");
  }
  TruncationProjection t;
  t.epsilon = epsilon;
  for (Index i = 0; i < k.m(); ++i) t.n_cutoffs.push_back(cutoff_for(k.m(), k.bounds()(i), epsilon));

  std::vector<Index> selected;
  RealVector max_coord = RealVector::Zero(k.m());
  for (Index j = 0; j < static_cast<Index>(grid.points.size()); ++j) {
    const auto& x = grid.points[static_cast<std::size_t>(j)];
    bool inside = true;
    for (Index i = 0; i < k.m(); ++i) {
      max_coord(i) = std::max(max_coord(i), x(i));
      if (x(i) > static_cast<double>(t.n_cutoffs[static_cast<std::size_t>(i)])) inside = false;
    }
    if (inside) selected.push_back(j);
  }
  for (Index i = 0; i < k.m(); ++i)
    if (static_cast<double>(t.n_cutoffs[static_cast<std::size_t>(i)]) >= max_coord(i)) t.exceeds_basis_range = true;
  t.projection = Projection::onto_basis(k.dim(), std::move(selected));
  return t;
}

namespace {

double projected_mass(const ComplexMatrix& rho, const Projection& p) {
  if (p.is_diagonal()) {
    double mass = 0.0;
    for (Index i : p.basis_indices()) mass += rho(i, i).real();
    return mass;
  }
  return (rho * p.matrix()).trace().real();
}

} // namespace

MarkovResult markov_mass_check(const DensityOperator& rho, const TruncationProjection& p_eps) {
  if (rho.dim() != p_eps.projection.dim()) throw DimensionError("markov_mass_check: dimension mismatch");
  MarkovResult r;
  r.mass = projected_mass(rho.matrix(), p_eps.projection);
  r.bound = 1.0 - p_eps.epsilon * p_eps.epsilon / 4.0;
  r.pass = r.mass >= r.bound - 1e-12;
  return r;
}

TruncationDefect truncation_defect(const DensityOperator& rho, const TruncationProjection& p_eps) {
  if (rho.dim() != p_eps.projection.dim()) throw DimensionError("truncation_defect: dimension mismatch");
  const ComplexMatrix& p = p_eps.projection.matrix();
  const ComplexMatrix& m = rho.matrix();
  TruncationDefect r;
  r.defect = trace_norm((p * m * p - m).eval());
  const double tail = std::max(0.0, m.trace().real() - projected_mass(m, p_eps.projection));
  r.jensen_bound = 2.0 * std::sqrt(tail);
  r.pass = r.defect <= r.jensen_bound + 1e-10;
  r.within_epsilon = r.defect <= p_eps.epsilon + 1e-10;
  return r;
}

RankOneNorm rank_one_truncation_norm(const ComplexVector& psi, const Projection& p) {
  if (psi.size() != p.dim()) throw DimensionError("rank_one_truncation_norm: dimension mismatch");
  if (std::abs(psi.norm() - 1.0) > 1e-12) throw InvalidArgument("rank_one_truncation_norm: psi is not a unit vector");
  const ComplexVector inside = p.matrix() * psi;
  const ComplexVector outside = psi - inside;
  RankOneNorm r;
  constexpr double kVanishing = 1e-13;
  if (inside.norm() <= kVanishing) {
    r.beta = 1.0;
    r.numeric = 1.0;
    r.closed_form = 1.0;
    r.two_beta_bound = 2.0;
    return r;
  }
  if (outside.norm() <= kVanishing) return r;
  r.beta = std::min(1.0, outside.norm());
  r.numeric = trace_norm((outer(inside, inside) - outer(psi, psi)).eval());
  r.closed_form = r.beta * std::sqrt(4.0 - 3.0 * r.beta * r.beta);
  r.two_beta_bound = 2.0 * r.beta;
  return r;
}

Eigen::Matrix2cd rank_one_block(Complex alpha, Complex beta) {
  Eigen::Matrix2cd a;
  a << Complex(0.0, 0.0), -std::conj(beta) * alpha, -beta * std::conj(alpha), -std::norm(beta);
  return a;
}

Eigen::Vector2d rank_one_block_eigenvalues(double beta) {
  const double root = std::sqrt(4.0 - 3.0 * beta * beta);
  return {-beta / 2.0 * (beta + root), -beta / 2.0 * (beta - root)};
}

std::vector<DensityOperator> sample_k(const ConstraintSet& k, const FockSpace& f, Index count, std::uint64_t seed) {
  if (k.dim() != f.dim()) throw DimensionError("sample_k: constraint set and Fock space differ in dimension");
  const std::vector<Index> box = k.box_indices();
  if (box.empty()) throw InvalidArgument("K sampler has no support");
  const Index d = f.dim();
  const auto nb = static_cast<Index>(box.size());

  Rng rng(seed);
  std::vector<DensityOperator> out;
  out.reserve(static_cast<std::size_t>(std::max<Index>(count, 0)));
  for (Index s = 0; s < count; ++s) {
    const ComplexMatrix sub = random_density_matrix(nb, uniform_index(1, nb, rng), rng);
    ComplexMatrix sigma = ComplexMatrix::Zero(d, d);
    for (Index a = 0; a < nb; ++a)
      for (Index b = 0; b < nb; ++b) sigma(box[static_cast<std::size_t>(a)], box[static_cast<std::size_t>(b)]) = sub(a, b);

    ComplexMatrix rho = sigma;
    if (s % 2 == 1) {
      const ComplexMatrix tail = random_density_matrix(d, uniform_index(1, std::min<Index>(d, 4), rng), rng);
      const RealVector e_sigma = k_membership(sigma, k).expectations;
      const RealVector e_tail = k_membership(tail, k).expectations;
      double t_max = 1.0;
      for (Index i = 0; i < k.m(); ++i) {
        if (e_tail(i) > e_sigma(i)) t_max = std::min(t_max, (k.bounds()(i) - e_sigma(i)) / (e_tail(i) - e_sigma(i)));
      }
      const double t = std::max(0.0, t_max) * uniform_real(0.0, 1.0, rng);
      rho = (1.0 - t) * sigma + t * tail;
    }
    rho = (rho + rho.adjoint()) / 2.0;
    DensityOperator state(std::move(rho));
    if (!k_membership(state, k).member) throw NumericalError("sample_k: generated state left K");
    out.push_back(std::move(state));
  }
  return out;
}

} // namespace qfix
