#include "qfix/cli.hpp"

#include "qfix/ctc.hpp"
#include "qfix/json_io.hpp"
#include "qfix/random.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace qfix {

namespace {

class CapExceeded : public Error {
public:
  using Error::Error;
};

/// Fully parsed command line (after merging --config and QFIX_SEED).
struct RunConfig {
  std::string command;
  std::string input;      // channel / scenario / fock file
  std::string constraint; // constraint file (fock-check, k-probe)
  std::string output;
  std::string config;
  std::string method = "spectral";
  std::int64_t n = 999;
  double tol = 1e-8;
  double eig_cluster_tol = kDefaultEigClusterTol;
  std::vector<double> epsilons{0.5, 0.2, 0.1};
  std::int64_t samples = 200;
  std::int64_t trials = 1000;
  std::int64_t max_dim = 64;
  std::uint64_t seed = 0;
  bool allow_large = false;
};

void check_cap(Index dim, long cap, const char* what, const RunConfig& cfg) {
  if (!cfg.allow_large && dim > cap) {
    throw CapExceeded(std::string(what) + " dimension " + std::to_string(dim) + " exceeds cap " + std::to_string(cap) +
                      " (use --allow-large)");
  }
}

Json base_report(const RunConfig& cfg) {
  Json out;
  out["version"] = kVersion;
  out["command"] = cfg.command;
  return out;
}

void merge_into(Json& dst, const Json& src) {
  for (const auto& item : src.items()) dst[item.key()] = item.value();
}

struct Outcome {
  Json report;
  bool pass = true;
  std::string summary;
};

Outcome cmd_solve(const RunConfig& cfg) {
  const Channel c = channel_from_json(read_json_file(cfg.input));
  check_cap(c.dim(), kOperatorDimCap, "operator", cfg);
  if (cfg.method == "spectral") check_cap(c.dim(), kSuperopDimCap, "superoperator", cfg);

  Outcome o{base_report(cfg)};
  Json tol;
  tol["cert_tol"] = kDefaultCertTol;
  FixedPointResult r = [&] {
    if (cfg.method == "cesaro") {
      if (cfg.n < 0) throw ParseError("--n must be non-negative");
      tol["cesaro_slack"] = 1e-9;
      return cesaro_iterate(c, DensityOperator::maximally_mixed(c.dim()), cfg.n);
    }
    if (cfg.method != "spectral") throw ParseError("--method must be cesaro or spectral");
    tol["tol"] = cfg.tol;
    tol["eig_cluster_tol"] = cfg.eig_cluster_tol;
    return spectral_fixed_point(c, SpectralOptions{cfg.tol, cfg.eig_cluster_tol});
  }();
  o.report["tolerances"] = tol;
  merge_into(o.report, to_json(r));
  double bound = cfg.tol;
  if (r.method == FixedPointMethod::cesaro) {
    const double n = static_cast<double>(r.iterations_or_multiplicity);
    bound = std::max(bound, 2.0 / (n + 1.0) + 1e-9);
  }
  o.report["residual_bound"] = bound;
  o.pass = r.residual <= bound;
  o.report["pass"] = o.pass;
  std::ostringstream s;
  s << "solve: method=" << to_string(r.method) << " residual=" << r.residual << (o.pass ? " PASS" : " FAIL");
  o.summary = s.str();
  return o;
}

Outcome cmd_verify_cptp(const RunConfig& cfg) {
  const Channel c = channel_from_json(read_json_file(cfg.input));
  check_cap(c.dim(), kSuperopDimCap, "superoperator", cfg);
  const CptpReport r = verify_cptp(c, cfg.tol);
  Outcome o{base_report(cfg)};
  o.report["tolerances"] = Json{{"tol", cfg.tol}};
  merge_into(o.report, to_json(r));
  o.pass = r.pass;
  std::ostringstream s;
  s << "verify-cptp: tp_defect=" << r.trace_preserving_defect << " choi_min=" << r.choi_min_eigenvalue
    << (r.pass ? " PASS" : " FAIL");
  o.summary = s.str();
  return o;
}

Outcome cmd_ctc_run(const RunConfig& cfg) {
  const Json j = read_json_file(cfg.input);
  const CtcScenario sc = scenario_from_json(j);
  check_cap(sc.full_dim(), kOperatorDimCap, "operator", cfg);
  check_cap(sc.fock_dim(), kSuperopDimCap, "superoperator", cfg);
  const ConsistentHistory h = solve_history(sc, SpectralOptions{cfg.tol, cfg.eig_cluster_tol});
  Outcome o{base_report(cfg)};
  o.report["tolerances"] = Json{{"tol", cfg.tol}, {"eig_cluster_tol", cfg.eig_cluster_tol}, {"cert_tol", kDefaultCertTol}};
  o.report["post_t2_rule"] = to_string(sc.post_t2_rule);
  merge_into(o.report, to_json(h));
  o.pass = h.consistency_residual <= cfg.tol;
  o.report["pass"] = o.pass;
  std::ostringstream s;
  s << "ctc-run: consistency_residual=" << h.consistency_residual << " multiplicity=" << h.multiplicity
    << (o.pass ? " PASS" : " FAIL");
  o.summary = s.str();
  return o;
}

Outcome cmd_fock_check(const RunConfig& cfg) {
  if (cfg.constraint.empty()) throw ParseError("fock-check needs a constraint file");
  const FockSpace f = fock_spec_from_json(read_json_file(cfg.input)).build();
  check_cap(f.dim(), kOperatorDimCap, "operator", cfg);
  const ConstraintSet k = constraint_from_json(read_json_file(cfg.constraint), f);
  if (cfg.samples < 0) throw ParseError("--samples must be non-negative");
  const auto states = sample_k(k, f, static_cast<Index>(cfg.samples), cfg.seed);

  Outcome o{base_report(cfg)};
  o.report["tolerances"] = Json{{"k_tol", kDefaultKTol}, {"markov_slack", 1e-12}, {"defect_slack", 1e-10}};
  o.report["seed"] = cfg.seed;
  o.report["fock_dim"] = f.dim();
  o.report["bounds"] = vector_to_json(k.bounds());
  o.report["samples"] = cfg.samples;

  const PvmGrid grid = k.grid();
  Json per_eps = Json::array();
  for (double eps : cfg.epsilons) {
    const TruncationProjection p = truncation_projection(k, grid, eps);
    Json e = to_json(p);
    double min_mass = 1.0, max_defect = 0.0, max_ratio = 0.0, max_restricted = 0.0;
    std::int64_t failures = 0;
    for (const auto& rho : states) {
      const auto mk = markov_mass_check(rho, p);
      const auto td = truncation_defect(rho, p);
      const double restricted =
          trace_norm((p.projection.matrix() * rho.matrix() * p.projection.matrix()).eval());
      min_mass = std::min(min_mass, mk.mass);
      max_defect = std::max(max_defect, td.defect);
      if (td.jensen_bound > 0) max_ratio = std::max(max_ratio, td.defect / td.jensen_bound);
      max_restricted = std::max(max_restricted, restricted);
      if (!mk.pass || !td.pass || !td.within_epsilon || restricted > 1.0 + 1e-10) ++failures;
    }
    e["markov_bound"] = 1.0 - eps * eps / 4.0;
    e["min_mass"] = min_mass;
    e["max_defect"] = max_defect;
    e["max_defect_over_jensen"] = max_ratio;
    e["max_restricted_trace_norm"] = max_restricted;
    e["failures"] = failures;
    if (failures > 0) o.pass = false;
    per_eps.push_back(std::move(e));
  }
  o.report["epsilons"] = std::move(per_eps);
  o.report["pass"] = o.pass;
  o.summary = std::string("fock-check: dim=") + std::to_string(f.dim()) + (o.pass ? " PASS" : " FAIL");
  return o;
}

Outcome cmd_k_probe(const RunConfig& cfg) {
  if (cfg.constraint.empty()) throw ParseError("k-probe needs --constraint");
  const CtcScenario sc = scenario_from_json(read_json_file(cfg.input));
  check_cap(sc.full_dim(), kOperatorDimCap, "operator", cfg);
  const ConstraintSet k = constraint_from_json(read_json_file(cfg.constraint), sc.fock);
  const Channel channel = build_ctc_channel(sc);
  if (cfg.samples < 0) throw ParseError("--samples must be non-negative");
  const ProbeReport r = k_invariance_probe(channel, k, sc.fock, static_cast<Index>(cfg.samples), cfg.seed);
  Outcome o{base_report(cfg)};
  o.report["tolerances"] = Json{{"k_tol", kDefaultKTol}};
  o.report["seed"] = cfg.seed;
  o.report["bounds"] = vector_to_json(k.bounds());
  merge_into(o.report, to_json(r));
  // Evidence about a hypothesis, not an asserted inequality.
  o.pass = true;
  std::ostringstream s;
  s << "k-probe: samples=" << cfg.samples << " violations=" << r.violations << " worst_excess=" << r.worst_excess;
  o.summary = s.str();
  return o;
}

Outcome cmd_lemma_check(const RunConfig& cfg) {
  if (cfg.trials < 0) throw ParseError("--trials must be non-negative");
  if (cfg.max_dim < 2) throw ParseError("--max-dim must be at least 2");
  check_cap(cfg.max_dim, kOperatorDimCap, "operator", cfg);
  Rng rng(cfg.seed);
  double max_diff = 0.0, max_excess = -std::numeric_limits<double>::infinity();
  for (std::int64_t t = 0; t < cfg.trials; ++t) {
    const Index d = uniform_index(2, static_cast<Index>(cfg.max_dim), rng);
    const ComplexVector psi = random_unit_vector(d, rng);
    const Index rank = uniform_index(1, d - 1, rng);
    Projection p;
    if (t % 2 == 0) {
      std::vector<Index> idx(static_cast<std::size_t>(d));
      for (Index i = 0; i < d; ++i) idx[static_cast<std::size_t>(i)] = i;
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<std::size_t>(rank));
      p = Projection::onto_basis(d, idx);
    } else {
      const ComplexMatrix q = random_unitary(d, rng).leftCols(rank);
      p = Projection(q * q.adjoint());
    }
    const RankOneNorm r = rank_one_truncation_norm(psi, p);
    max_diff = std::max(max_diff, std::abs(r.numeric - r.closed_form));
    max_excess = std::max(max_excess, r.numeric - r.two_beta_bound);
  }

  // Degenerate branches: psi inside range(P) and psi orthogonal to it.
  const Projection p0 = Projection::onto_basis(4, {0, 1});
  ComplexVector inside = ComplexVector::Zero(4), outside = ComplexVector::Zero(4);
  inside << Complex(0.6, 0.0), Complex(0.0, 0.8), 0.0, 0.0;
  outside << 0.0, 0.0, Complex(0.0, 0.6), Complex(0.8, 0.0);
  const RankOneNorm beta0 = rank_one_truncation_norm(inside, p0);
  const RankOneNorm beta1 = rank_one_truncation_norm(outside, p0);

  Outcome o{base_report(cfg)};
  o.report["tolerances"] = Json{{"closed_form_tol", 1e-10}, {"two_beta_slack", 1e-12}};
  o.report["seed"] = cfg.seed;
  o.report["trials"] = cfg.trials;
  o.report["max_dim"] = cfg.max_dim;
  o.report["max_abs_numeric_minus_closed_form"] = max_diff;
  o.report["max_numeric_minus_two_beta"] = cfg.trials > 0 ? max_excess : 0.0;
  o.report["beta0_numeric"] = beta0.numeric;
  o.report["beta1_numeric"] = beta1.numeric;
  o.pass = max_diff <= 1e-10 && (cfg.trials == 0 || max_excess <= 1e-12) && beta0.numeric == 0.0 &&
           beta1.numeric == 1.0;
  o.report["pass"] = o.pass;
  std::ostringstream s;
  s << "lemma-check: trials=" << cfg.trials << " max_diff=" << max_diff << (o.pass ? " PASS" : " FAIL");
  o.summary = s.str();
  return o;
}

std::string json_value_as_arg(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// Applies --config values to options that were not given on the command line.
void merge_config(CLI::App* sub, const std::string& path) {
  const Json cfg = read_json_file(path);
  if (!cfg.is_object()) throw ParseError("config: expected a JSON object");
  for (const auto& item : cfg.items()) {
    const std::string& key = item.key();
    if (key == "config") throw ParseError("config: nested \"config\" is not allowed");
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) opt = sub->get_option_no_throw(key);
    if (opt == nullptr) throw ParseError("config: unknown field \"" + key + "\" for " + sub->get_name());
    if (opt->count() > 0) continue;
    const Json& v = item.value();
    if (v.is_array()) {
      for (const auto& e : v) opt->add_result(json_value_as_arg(e));
    } else if (v.is_boolean()) {
      opt->add_result(v.get<bool>() ? "true" : "false");
    } else {
      opt->add_result(json_value_as_arg(v));
    }
    opt->run_callback();
  }
}

void emit_error(std::ostream& err, const char* kind, const std::string& message) {
  Json e;
  e["version"] = kVersion;
  e["error"] = kind;
  e["message"] = message;
  err << e.dump() << "\n";
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Fixed points of quantum channels and Deutsch CTC consistency checks", "qfix"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::optional<std::uint64_t> seed_flag;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--output,-o", cfg.output, "Write the JSON report here instead of stdout");
    sub->add_option("--config", cfg.config, "JSON file supplying option values");
    sub->add_flag("--allow-large", cfg.allow_large, "Lift the dimension caps");
  };
  const auto seeded = [&](CLI::App* sub) {
    sub->add_option("--seed", seed_flag, "RNG seed (falls back to QFIX_SEED, then 0)");
  };

  auto* solve = app.add_subcommand("solve", "Find a fixed point of a channel");
  solve->add_option("channel", cfg.input, "Channel JSON file");
  solve->add_option("--method", cfg.method, "cesaro or spectral")->check(CLI::IsMember({"cesaro", "spectral"}));
  solve->add_option("--n", cfg.n, "Cesaro iteration count N");
  solve->add_option("--tol", cfg.tol, "Residual tolerance (spectral)");
  solve->add_option("--eig-cluster-tol", cfg.eig_cluster_tol, "Eigenvalue-1 cluster radius");
  common(solve);

  auto* verify = app.add_subcommand("verify-cptp", "Check trace preservation and Choi positivity");
  verify->add_option("channel", cfg.input, "Channel JSON file");
  verify->add_option("--tol", cfg.tol, "Defect tolerance");
  common(verify);

  auto* ctc = app.add_subcommand("ctc-run", "Solve a Deutsch-consistent history");
  ctc->add_option("scenario", cfg.input, "Scenario JSON file");
  ctc->add_option("--tol", cfg.tol, "Fixed-point tolerance");
  ctc->add_option("--eig-cluster-tol", cfg.eig_cluster_tol, "Eigenvalue-1 cluster radius");
  common(ctc);

  auto* fock = app.add_subcommand("fock-check", "Check truncation inequalities on sampled members of K");
  fock->add_option("fock", cfg.input, "Fock space JSON file");
  fock->add_option("constraint", cfg.constraint, "Constraint set JSON file");
  fock->add_option("--epsilons", cfg.epsilons, "Comma-separated epsilons")->delimiter(',');
  fock->add_option("--samples", cfg.samples, "Number of sampled states");
  seeded(fock);
  common(fock);

  auto* probe = app.add_subcommand("k-probe", "Probe S(K) subset K by sampling");
  probe->add_option("scenario", cfg.input, "Scenario JSON file");
  probe->add_option("--constraint", cfg.constraint, "Constraint set JSON file");
  probe->add_option("--samples", cfg.samples, "Number of sampled states");
  seeded(probe);
  common(probe);

  auto* lemma = app.add_subcommand("lemma-check", "Rank-one truncation norm versus its closed form");
  lemma->add_option("--trials", cfg.trials, "Number of random (psi, P) pairs");
  lemma->add_option("--max-dim", cfg.max_dim, "Largest dimension drawn");
  seeded(lemma);
  common(lemma);

  cfg.samples = -1;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what());
    return kExitBadInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();

  try {
    if (!cfg.config.empty()) merge_config(sub, cfg.config);
    if (cfg.samples < 0) cfg.samples = cfg.command == "k-probe" ? 50 : 200;
    if (seed_flag) {
      cfg.seed = *seed_flag;
    } else if (const char* env = std::getenv("QFIX_SEED")) {
      try {
        cfg.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw ParseError(std::string("QFIX_SEED is not an unsigned integer: ") + env);
      }
    }
    if (cfg.input.empty() && cfg.command != "lemma-check") throw ParseError("missing input file");

    Outcome o;
    if (cfg.command == "solve") o = cmd_solve(cfg);
    else if (cfg.command == "verify-cptp") o = cmd_verify_cptp(cfg);
    else if (cfg.command == "ctc-run") o = cmd_ctc_run(cfg);
    else if (cfg.command == "fock-check") o = cmd_fock_check(cfg);
    else if (cfg.command == "k-probe") o = cmd_k_probe(cfg);
    else o = cmd_lemma_check(cfg);

    const std::string text = o.report.dump(2) + "\n";
    if (cfg.output.empty()) {
      out << text;
    } else {
      std::ofstream f(cfg.output, std::ios::binary);
      if (!f) throw ParseError("cannot write " + cfg.output);
      f << text;
    }
    err << o.summary << "\n";
    return o.pass ? kExitOk : kExitFailed;
  } catch (const ParseError& e) {
    emit_error(err, "bad_input", e.what());
    return kExitBadInput;
  } catch (const nlohmann::json::exception& e) {
    emit_error(err, "bad_input", e.what());
    return kExitBadInput;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "bad_input", e.what());
    return kExitBadInput;
  } catch (const CapExceeded& e) {
    emit_error(err, "dimension_cap", e.what());
    return kExitTooLarge;
  } catch (const Error& e) {
    emit_error(err, "failure", e.what());
    return kExitFailed;
  }
}

} // namespace qfix
