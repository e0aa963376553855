#include "qfix/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qfix {

void require_keys(const Json& j, std::initializer_list<const char*> required, std::initializer_list<const char*> optional) {
  if (!j.is_object()) throw ParseError("expected a JSON object");
  for (const char* key : required) {
    if (!j.contains(key)) throw ParseError(std::string("missing key \"") + key + "\"");
  }
  for (const auto& item : j.items()) {
    const auto& key = item.key();
    const auto match = [&](const char* k) { return key == k; };
    if (std::none_of(required.begin(), required.end(), match) && std::none_of(optional.begin(), optional.end(), match)) {
      throw ParseError("unknown key \"" + key + "\"");
    }
  }
}

namespace {

double number_at(const Json& j, const char* what) {
  if (!j.is_number()) throw ParseError(std::string(what) + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(std::string(what) + ": non-finite number");
  return v;
}

Index positive_index(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw ParseError(std::string(what) + ": expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v <= 0) throw ParseError(std::string(what) + ": expected a positive integer");
  return static_cast<Index>(v);
}

Statistics statistics_from(const Json& j) {
  if (!j.is_string()) throw ParseError("statistics: expected a string");
  const auto s = j.get<std::string>();
  if (s == "boson") return Statistics::boson;
  if (s == "fermion") return Statistics::fermion;
  throw ParseError("statistics: expected \"boson\" or \"fermion\", got \"" + s + "\"");
}

} // namespace

Json vector_to_json(const RealVector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json matrix_to_json(const ComplexMatrix& m) {
  Json entries = Json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) entries.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
  Json out;
  out["dim"] = m.rows();
  out["entries"] = std::move(entries);
  return out;
}

ComplexMatrix matrix_from_json(const Json& j) {
  require_keys(j, {"dim", "entries"});
  const Index d = positive_index(j.at("dim"), "dim");
  const Json& entries = j.at("entries");
  if (!entries.is_array()) throw ParseError("entries: expected an array");
  if (static_cast<Index>(entries.size()) != d * d) {
    throw ParseError("entries: expected " + std::to_string(d * d) + " entries, got " + std::to_string(entries.size()));
  }
  ComplexMatrix m(d, d);
  for (Index k = 0; k < d * d; ++k) {
    const Json& e = entries[static_cast<std::size_t>(k)];
    if (!e.is_array() || e.size() != 2) throw ParseError("entries: each entry must be [re, im]");
    m(k / d, k % d) = Complex(number_at(e[0], "entries"), number_at(e[1], "entries"));
  }
  return m;
}

Json channel_to_json(const Channel& c) {
  Json out;
  out["dim"] = c.dim();
  out["repr"] = c.repr_name();
  if (c.is_kraus()) {
    Json ops = Json::array();
    for (const auto& k : c.kraus().kraus) ops.push_back(matrix_to_json(k));
    out["kraus"] = std::move(ops);
  } else if (c.is_superop()) {
    out["matrix"] = matrix_to_json(c.superop().matrix);
  } else {
    const auto& s = c.stinespring();
    out["env_dim"] = s.env_dim;
    out["u"] = matrix_to_json(s.u);
    out["rho_env"] = matrix_to_json(s.rho_env.matrix());
  }
  return out;
}

Channel channel_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("repr") || !j.at("repr").is_string()) throw ParseError("channel: missing \"repr\"");
  const auto repr = j.at("repr").get<std::string>();
  try {
    if (repr == "kraus") {
      require_keys(j, {"dim", "repr", "kraus"});
      const Index d = positive_index(j.at("dim"), "dim");
      const Json& ops = j.at("kraus");
      if (!ops.is_array() || ops.empty()) throw ParseError("kraus: expected a nonempty array");
      KrausChannel k{d, {}};
      for (const auto& op : ops) {
        k.kraus.push_back(matrix_from_json(op));
        if (k.kraus.back().rows() != d) throw ParseError("kraus: operator dimension != dim");
      }
      return Channel(std::move(k));
    }
    if (repr == "superop") {
      require_keys(j, {"dim", "repr", "matrix"});
      const Index d = positive_index(j.at("dim"), "dim");
      ComplexMatrix m = matrix_from_json(j.at("matrix"));
      if (m.rows() != d * d) throw ParseError("superop: matrix dimension != dim^2");
      return Channel(SuperoperatorMatrix{d, std::move(m)});
    }
    if (repr == "stinespring") {
      require_keys(j, {"dim", "repr", "env_dim", "u", "rho_env"});
      const Index d = positive_index(j.at("dim"), "dim");
      const Index e = positive_index(j.at("env_dim"), "env_dim");
      ComplexMatrix u = matrix_from_json(j.at("u"));
      DensityOperator rho_env(matrix_from_json(j.at("rho_env")));
      return Channel(StinespringChannel{e, d, std::move(u), std::move(rho_env)});
    }
  } catch (const DimensionError& e) {
    throw ParseError(std::string("channel: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("channel: ") + e.what());
  }
  throw ParseError("channel: unknown repr \"" + repr + "\"");
}

Json fock_spec_to_json(const FockSpec& f) {
  Json out;
  out["energies"] = f.energies;
  out["statistics"] = to_string(f.statistics);
  out["n_max"] = f.n_max;
  out["e_max"] = f.e_max;
  return out;
}

FockSpec fock_spec_from_json(const Json& j) {
  require_keys(j, {"energies", "statistics", "n_max", "e_max"});
  FockSpec f;
  const Json& e = j.at("energies");
  if (!e.is_array() || e.empty()) throw ParseError("energies: expected a nonempty array");
  for (const auto& x : e) f.energies.push_back(number_at(x, "energies"));
  f.statistics = statistics_from(j.at("statistics"));
  if (!j.at("n_max").is_number_integer() || j.at("n_max").get<std::int64_t>() < 0) {
    throw ParseError("n_max: expected a non-negative integer");
  }
  f.n_max = j.at("n_max").get<int>();
  f.e_max = number_at(j.at("e_max"), "e_max");
  return f;
}

FockSpec fock_spec_of(const FockSpace& f) { return {f.mode_energies(), f.statistics(), f.n_max(), f.e_max()}; }

ConstraintSet constraint_from_json(const Json& j, const FockSpace& f) {
  require_keys(j, {"bounds"});
  const Json& b = j.at("bounds");
  if (!b.is_array() || b.size() != 2) throw ParseError("bounds: expected [N, E]");
  const double n = number_at(b[0], "bounds"), e = number_at(b[1], "bounds");
  if (!(n > 0) || !(e > 0)) throw ParseError("bounds: entries must be positive");
  return ConstraintSet::number_energy(f, n, e);
}

Json constraint_to_json(const ConstraintSet& k) {
  Json out;
  out["bounds"] = vector_to_json(k.bounds());
  return out;
}

Json scenario_to_json(const CtcScenario& s) {
  Json out;
  out["h_in_dim"] = s.h_in_dim;
  out["fock"] = fock_spec_to_json(fock_spec_of(s.fock));
  out["u"] = matrix_to_json(s.u);
  out["rho_t1_minus"] = matrix_to_json(s.rho_t1_minus.matrix());
  out["post_t2_rule"] = to_string(s.post_t2_rule);
  return out;
}

CtcScenario scenario_from_json(const Json& j, Index basis_cap) {
  require_keys(j, {"h_in_dim", "fock", "u", "rho_t1_minus", "post_t2_rule"});
  const Index din = positive_index(j.at("h_in_dim"), "h_in_dim");
  FockSpace fock = fock_spec_from_json(j.at("fock")).build(basis_cap);
  ComplexMatrix u = matrix_from_json(j.at("u"));
  const Json& rule = j.at("post_t2_rule");
  if (!rule.is_string()) throw ParseError("post_t2_rule: expected a string");
  SpliceRule r;
  if (rule.get<std::string>() == "vacuum_splice") {
    r = SpliceRule::vacuum_splice;
  } else if (rule.get<std::string>() == "recycle_splice") {
    r = SpliceRule::recycle_splice;
  } else {
    throw ParseError("post_t2_rule: expected \"vacuum_splice\" or \"recycle_splice\"");
  }
  try {
    DensityOperator rho(matrix_from_json(j.at("rho_t1_minus")));
    CtcScenario s{din, std::move(fock), std::move(u), std::move(rho), r};
    s.validate();
    return s;
  } catch (const DimensionError& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
}

Json to_json(const FixedPointResult& r) {
  Json out;
  out["method"] = to_string(r.method);
  out["residual"] = r.residual;
  out["iterations_or_multiplicity"] = r.iterations_or_multiplicity;
  out["rho"] = matrix_to_json(r.rho.matrix());
  return out;
}

Json to_json(const CptpReport& r) {
  Json out;
  out["trace_preserving_defect"] = r.trace_preserving_defect;
  out["choi_min_eigenvalue"] = r.choi_min_eigenvalue;
  out["choi_hermiticity_defect"] = r.choi_hermiticity_defect;
  out["tol"] = r.tol;
  out["pass"] = r.pass;
  return out;
}

Json to_json(const ConsistentHistory& h) {
  Json out;
  out["rho_in"] = matrix_to_json(h.rho_in.matrix());
  out["rho1"] = matrix_to_json(h.rho1.matrix());
  out["rho_t2_minus"] = matrix_to_json(h.rho_t2_minus.matrix());
  out["rho_t2_plus"] = matrix_to_json(h.rho_t2_plus.matrix());
  out["consistency_residual"] = h.consistency_residual;
  out["multiplicity"] = h.multiplicity;
  out["method"] = to_string(h.method);
  return out;
}

Json to_json(const TruncationProjection& t) {
  Json out;
  out["epsilon"] = t.epsilon;
  out["n_cutoffs"] = t.n_cutoffs;
  out["rank"] = t.projection.rank();
  out["exceeds_basis_range"] = t.exceeds_basis_range;
  return out;
}

Json to_json(const ProbeReport& r) {
  Json out;
  out["violations"] = r.violations;
  out["worst_excess"] = r.worst_excess;
  Json samples = Json::array();
  for (const auto& s : r.per_sample) {
    Json e;
    e["before"] = vector_to_json(s.before);
    e["after"] = vector_to_json(s.after);
    e["member_after"] = s.member_after;
    samples.push_back(std::move(e));
  }
  out["per_sample"] = std::move(samples);
  return out;
}

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str());
}

} // namespace qfix
