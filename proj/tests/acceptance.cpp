// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance <path-to-qfix-binary>

#include "qfix/ctc.hpp"
#include "qfix/fixpoint.hpp"
#include "qfix/fock.hpp"
#include "qfix/json_io.hpp"
#include "qfix/random.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace qfix;

namespace {

namespace tol {
constexpr double cesaro_slack = 1e-9;
constexpr double spectral_residual = 1e-8;
constexpr double lemma_closed_form = 1e-10;
constexpr double lemma_two_beta = 1e-12;
constexpr double markov_slack = 1e-12;
constexpr double defect_slack = 1e-10;
constexpr double tp_defect = 1e-10;
constexpr double choi_min = -1e-8;
constexpr double cptp_verify = 1e-8;
constexpr double consistency = 1e-8;
constexpr double swap_entrywise = 1e-10;
constexpr double shift_position = 1e-12;
} // namespace tol

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s [%d] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

Channel random_channel(Index d, Rng& rng) {
  return Channel(KrausChannel{d, random_kraus_operators(d, uniform_index(1, 4, rng), rng)});
}

Outcome cesaro_bound() {
  Rng rng(1001);
  const Index dims[] = {2, 3, 4, 8};
  int bad = 0, runs = 0;
  double worst = -1.0;
  for (int c = 0; c < 50; ++c) {
    const Index d = dims[c % 4];
    const Channel s = random_channel(d, rng);
    for (int r = 0; r < 5; ++r) {
      const DensityOperator rho0(random_density_matrix(d, uniform_index(1, d, rng), rng));
      for (std::int64_t n : {9, 99, 999}) {
        const auto res = cesaro_iterate(s, rho0, n);
        const double bound = 2.0 / static_cast<double>(n + 1);
        worst = std::max(worst, res.residual - bound);
        ++runs;
        if (!(res.residual <= bound + tol::cesaro_slack)) ++bad;
      }
    }
  }
  return {bad == 0, std::to_string(runs) + " runs, " + std::to_string(bad) + " failures, max(residual - 2/(N+1)) = " + fmt(worst)};
}

Outcome spectral_existence() {
  Rng rng(1002);
  int bad = 0;
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const Index d = uniform_index(2, 16, rng);
    const auto r = spectral_fixed_point(random_channel(d, rng));
    worst = std::max(worst, r.residual);
    if (!(r.residual <= tol::spectral_residual)) ++bad;
  }
  return {bad == 0, "100 channels, " + std::to_string(bad) + " failures, max residual " + fmt(worst)};
}

Outcome rank_one_lemma() {
  Rng rng(1003);
  double max_diff = 0.0, max_excess = -1.0;
  for (int t = 0; t < 1000; ++t) {
    const Index d = uniform_index(2, 64, rng);
    const Index rank = uniform_index(1, d - 1, rng);
    Projection p;
    if (t % 2 == 0) {
      std::vector<Index> idx;
      for (Index i = 0; i < d; ++i) idx.push_back(i);
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<std::size_t>(rank));
      p = Projection::onto_basis(d, idx);
    } else {
      const ComplexMatrix q = random_unitary(d, rng).leftCols(rank);
      p = Projection(q * q.adjoint());
    }
    const auto r = rank_one_truncation_norm(random_unit_vector(d, rng), p);
    max_diff = std::max(max_diff, std::abs(r.numeric - r.beta * std::sqrt(4.0 - 3.0 * r.beta * r.beta)));
    max_excess = std::max(max_excess, r.numeric - 2.0 * r.beta);
  }
  const Projection p = Projection::onto_basis(6, {1, 4});
  ComplexVector inside = ComplexVector::Zero(6), outside = ComplexVector::Zero(6);
  inside(1) = Complex(0.0, 0.6);
  inside(4) = 0.8;
  outside(0) = 0.8;
  outside(5) = Complex(0.0, -0.6);
  const double n0 = rank_one_truncation_norm(inside, p).numeric;
  const double n1 = rank_one_truncation_norm(outside, p).numeric;
  const bool pass = max_diff <= tol::lemma_closed_form && max_excess <= tol::lemma_two_beta && n0 == 0.0 && n1 == 1.0;
  return {pass, "max |numeric - closed form| = " + fmt(max_diff) + ", max(numeric - 2 beta) = " + fmt(max_excess) +
                    ", beta=0 -> " + fmt(n0) + ", beta=1 -> " + fmt(n1)};
}

Outcome truncation_chain() {
  const FockSpace f = build_fock({1.0, 2.0}, Statistics::boson, 6, 8.0);
  const ConstraintSet k = ConstraintSet::number_energy(f, 0.006, 0.006);
  const auto states = sample_k(k, f, 200, 1004);
  int bad = 0;
  bool interior = true;
  double min_margin = 1.0;
  for (double eps : {0.5, 0.2, 0.1}) {
    const auto p = truncation_projection(k, k.grid(), eps);
    interior = interior && !p.exceeds_basis_range && p.projection.rank() < f.dim();
    for (const auto& rho : states) {
      if (!k_membership(rho, k).member) ++bad;
      const auto m = markov_mass_check(rho, p);
      const auto t = truncation_defect(rho, p);
      const double bound = std::min(2.0 * std::sqrt(std::max(0.0, 1.0 - m.mass)), eps);
      min_margin = std::min(min_margin, bound - t.defect);
      if (!(m.mass >= 1.0 - eps * eps / 4.0 - tol::markov_slack)) ++bad;
      if (!(t.defect <= bound + tol::defect_slack)) ++bad;
    }
  }
  return {bad == 0 && interior, "600 checks, " + std::to_string(bad) + " failures, P_eps interior: " +
                                    (interior ? "yes" : "no") + ", min slack " + fmt(min_margin)};
}

std::int64_t least_cutoff_by_scan(Index m, double b, double eps) {
  std::int64_t n = 1;
  while (!(4.0 * static_cast<double>(m) * b / static_cast<double>(n) < eps * eps)) ++n;
  return n;
}

Outcome cutoff_formula() {
  const auto headline = cutoff_for(2, 1.0, 0.5);
  Rng rng(1005);
  int bad = 0;
  for (int t = 0; t < 100; ++t) {
    const Index m = uniform_index(1, 5, rng);
    const double b = uniform_real(0.01, 10.0, rng);
    const double eps = uniform_real(0.05, 2.0, rng);
    const auto n = cutoff_for(m, b, eps);
    bool ok = n == least_cutoff_by_scan(m, b, eps);
    for (std::int64_t j = 1; j < n && ok; ++j) ok = !(4.0 * static_cast<double>(m) * b / static_cast<double>(j) < eps * eps);
    if (!ok) ++bad;
  }
  return {headline == 33 && bad == 0,
          "(m=2, b=1, eps=0.5) -> " + std::to_string(headline) + ", 100 random triples, " + std::to_string(bad) + " mismatches"};
}

FockSpace random_small_fock(Rng& rng, Index max_dim) {
  while (true) {
    const Index modes = uniform_index(1, 3, rng);
    std::vector<double> e;
    double acc = 0.0;
    for (Index i = 0; i < modes; ++i) e.push_back(acc += uniform_real(0.3, 1.5, rng));
    const auto stats = uniform_index(0, 1, rng) == 0 ? Statistics::boson : Statistics::fermion;
    FockSpace f = build_fock(e, stats, static_cast<int>(uniform_index(0, 3, rng)), uniform_real(0.0, 4.0, rng));
    if (f.dim() <= max_dim) return f;
  }
}

CtcScenario random_scenario(Rng& rng, SpliceRule rule) {
  const Index din = uniform_index(1, 4, rng);
  FockSpace f = random_small_fock(rng, 8);
  const Index d = din * f.dim();
  ComplexMatrix u = random_unitary(d, rng);
  DensityOperator rho(random_density_matrix(d, rng));
  return CtcScenario{din, std::move(f), std::move(u), std::move(rho), rule};
}

Outcome deutsch_cptp() {
  Rng rng(1006);
  int bad = 0;
  double worst_tp = 0.0, worst_choi = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto sc = random_scenario(rng, SpliceRule::vacuum_splice);
    const auto r = verify_cptp(build_ctc_channel(sc), tol::cptp_verify);
    worst_tp = std::max(worst_tp, r.trace_preserving_defect);
    worst_choi = std::min(worst_choi, r.choi_min_eigenvalue);
    if (!(r.trace_preserving_defect <= tol::tp_defect) || !(r.choi_min_eigenvalue >= tol::choi_min)) ++bad;
  }
  return {bad == 0, "50 scenarios, " + std::to_string(bad) + " failures, max TP defect " + fmt(worst_tp) +
                        ", min Choi eigenvalue " + fmt(worst_choi)};
}

Outcome ctc_consistency() {
  Rng rng(1007);
  int bad = 0;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto sc = random_scenario(rng, t % 2 == 0 ? SpliceRule::vacuum_splice : SpliceRule::recycle_splice);
    const auto h = solve_history(sc);
    worst = std::max(worst, h.consistency_residual);
    if (!(h.consistency_residual <= tol::consistency)) ++bad;
  }

  const FockSpace f3 = build_fock({1.0, 2.0}, Statistics::boson, 1, 2.0);
  const Index d = f3.dim();
  ComplexMatrix swap = ComplexMatrix::Zero(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) swap(j * d + i, i * d + j) = 1.0;
  const CtcScenario s_swap{d, f3, swap, DensityOperator(random_density_matrix(d * d, rng)), SpliceRule::vacuum_splice};
  const auto hs = solve_history(s_swap);
  const double swap_err = (hs.rho1.matrix() - hs.rho_in.matrix()).cwiseAbs().maxCoeff();

  const CtcScenario s_id{2, f3, ComplexMatrix::Identity(2 * d, 2 * d), DensityOperator(random_density_matrix(2 * d, rng)),
                         SpliceRule::vacuum_splice};
  const auto hi = solve_history(s_id);

  const bool pass = bad == 0 && swap_err <= tol::swap_entrywise && hi.multiplicity == d * d;
  return {pass, "20 scenarios, max residual " + fmt(worst) + ", SWAP |rho1 - rho_in|_max = " + fmt(swap_err) +
                    ", identity multiplicity " + std::to_string(hi.multiplicity) + " (d^2 = " + std::to_string(d * d) + ")"};
}

// Recursive count of occupation vectors with n <= a1 and e <= a2, no cutoffs beyond those.
Index brute_count(const std::vector<double>& e, Statistics s, std::size_t mode, int n, double en, double a1, double a2) {
  if (mode == e.size()) return 1;
  Index total = 0;
  const int top = s == Statistics::fermion ? 1 : 1000;
  for (int occ = 0; occ <= top; ++occ) {
    const int n2 = n + occ;
    const double e2 = en + occ * e[mode];
    if (n2 > a1 || e2 > a2 + 1e-12 * std::max(1.0, a2)) break;
    total += brute_count(e, s, mode + 1, n2, e2, a1, a2);
  }
  return total;
}

Outcome subspace_dimension() {
  const FockSpace ex = build_fock({1.0, 2.0}, Statistics::boson, 4, 6.0);
  const Index example = spectral_subspace_dim(ex, 2, 2);
  Rng rng(1008);
  int bad = 0;
  for (int t = 0; t < 50; ++t) {
    const Index modes = uniform_index(1, 4, rng);
    std::vector<double> e;
    double acc = 0.0;
    for (Index i = 0; i < modes; ++i) e.push_back(acc += uniform_real(0.25, 1.5, rng));
    const auto stats = uniform_index(0, 1, rng) == 0 ? Statistics::boson : Statistics::fermion;
    const int n_max = static_cast<int>(uniform_index(1, 5, rng));
    const double e_max = uniform_real(1.0, 5.0, rng);
    const FockSpace f = build_fock(e, stats, n_max, e_max);
    const double a1 = uniform_real(0.0, n_max, rng), a2 = uniform_real(0.0, e_max, rng);
    const Index got = spectral_subspace_dim(f, a1, a2);
    if (got != brute_count(e, stats, 0, 0, 0.0, a1, a2)) ++bad;
    if (static_cast<double>(got) > combinatorial_rank_bound(f, a1, a2)) ++bad;
  }
  return {example == 4 && bad == 0,
          "worked example -> " + std::to_string(example) + ", 50 random boxes, " + std::to_string(bad) + " failures"};
}

Outcome shift_escape() {
  std::string detail;
  bool pass = true;
  for (Index d : {4, 8, 16, 32}) {
    const auto r = spectral_fixed_point(Channel(truncated_shift_channel(d)));
    double position = 0.0;
    for (Index k = 0; k < d; ++k) position += static_cast<double>(k) * r.rho.matrix()(k, k).real();
    const double err = std::abs(position - static_cast<double>(d - 1));
    pass = pass && err <= tol::shift_position && r.iterations_or_multiplicity == 1;
    detail += "d=" + std::to_string(d) + ": <x> - (d-1) = " + fmt(position - static_cast<double>(d - 1)) + "; ";
  }
  return {pass, detail};
}

std::string capture(const std::string& command) {
  std::string out;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed");
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = ::pclose(pipe);
  out += "\n[status " + std::to_string(status) + "]";
  return out;
}

Outcome cli_determinism(const std::string& exe) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("qfix_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto write = [&](const std::string& name, const Json& j) {
    std::ofstream(dir / name) << j.dump();
    return "'" + (dir / name).string() + "'";
  };
  Rng rng(1010);
  const FockSpace f = build_fock({1.0, 2.0}, Statistics::boson, 2, 3.0);
  const CtcScenario sc{2, f, random_unitary(2 * f.dim(), rng), DensityOperator(random_density_matrix(2 * f.dim(), rng)),
                       SpliceRule::recycle_splice};
  const auto channel = write("channel.json", channel_to_json(random_channel(4, rng)));
  const auto scenario = write("scenario.json", scenario_to_json(sc));
  const auto fock = write("fock.json", fock_spec_to_json(fock_spec_of(build_fock({1.0, 2.0}, Statistics::boson, 6, 8.0))));
  const auto bounds = write("bounds.json", Json::parse(R"({"bounds": [0.006, 0.006]})"));
  const auto wide = write("wide.json", Json::parse(R"({"bounds": [1.0, 1.5]})"));

  const std::string q = "'" + exe + "' ";
  const std::vector<std::string> commands = {
      q + "solve " + channel + " --method spectral",
      q + "solve " + channel + " --method cesaro --n 99",
      q + "verify-cptp " + channel,
      q + "ctc-run " + scenario,
      q + "fock-check " + fock + " " + bounds + " --seed 42",
      q + "k-probe " + scenario + " --constraint " + wide + " --seed 42",
      q + "lemma-check --trials 200 --seed 42",
  };
  int mismatches = 0;
  std::size_t bytes = 0;
  for (const auto& c : commands) {
    const std::string a = capture(c + " 2>/dev/null"), b = capture(c + " 2>/dev/null");
    bytes += a.size();
    if (a != b || a.find("\"version\"") == std::string::npos) ++mismatches;
  }
  fs::remove_all(dir);
  return {mismatches == 0, std::to_string(commands.size()) + " commands run twice, " + std::to_string(bytes) +
                               " bytes compared, " + std::to_string(mismatches) + " mismatches"};
}

} // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <qfix-binary>\n";
    return 2;
  }
  const std::string exe = argv[1];
  report(1, "Cesaro residual bound", cesaro_bound);
  report(2, "spectral fixed points exist", spectral_existence);
  report(3, "rank-one lemma exactness", rank_one_lemma);
  report(4, "truncation chain", truncation_chain);
  report(5, "cutoff formula", cutoff_formula);
  report(6, "Deutsch channel CPTP", deutsch_cptp);
  report(7, "CTC consistency", ctc_consistency);
  report(8, "spectral subspace dimension", subspace_dimension);
  report(9, "shift escape", shift_escape);
  report(10, "CLI determinism", [&] { return cli_determinism(exe); });
  std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
