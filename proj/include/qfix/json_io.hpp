// json_io.hpp
// JSON readers/writers for matrices, channels, Fock specs, constraint sets,
// CTC scenarios and solver reports. Readers are strict: unknown keys, missing
// keys and wrong array lengths raise ParseError.
//
// Matrix format: {"dim": d, "entries": [[re, im], ...]} in row-major order.

#pragma once

#include "qfix/channels.hpp"
#include "qfix/ctc.hpp"
#include "qfix/fixpoint.hpp"
#include "qfix/fock.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>

namespace qfix {

using Json = nlohmann::ordered_json;

class ParseError : public Error {
public:
  using Error::Error;
};

inline constexpr const char* kVersion = "qfix 0.1.0";

Json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);

Json channel_to_json(const Channel& c);
Channel channel_from_json(const Json& j);

struct FockSpec {
  std::vector<double> energies;
  Statistics statistics = Statistics::boson;
  int n_max = 0;
  double e_max = 0.0;

  FockSpace build(Index basis_cap = kDefaultBasisCap) const {
    return build_fock(energies, statistics, n_max, e_max, basis_cap);
  }
};

Json fock_spec_to_json(const FockSpec& f);
FockSpec fock_spec_from_json(const Json& j);
FockSpec fock_spec_of(const FockSpace& f);

/// {"bounds": [N, E]} -> bounds on the number and energy operators of f.
ConstraintSet constraint_from_json(const Json& j, const FockSpace& f);
Json constraint_to_json(const ConstraintSet& k);

Json scenario_to_json(const CtcScenario& s);
CtcScenario scenario_from_json(const Json& j, Index basis_cap = kDefaultBasisCap);

Json to_json(const FixedPointResult& r);
Json to_json(const CptpReport& r);
Json to_json(const ConsistentHistory& h);
Json to_json(const TruncationProjection& t);
Json to_json(const ProbeReport& r);

Json parse_json_text(const std::string& text);
Json read_json_file(const std::string& path);

/// Throws ParseError when j is not an object or has keys outside `allowed`.
void require_keys(const Json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {});

Json vector_to_json(const RealVector& v);

} // namespace qfix
