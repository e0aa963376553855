// cli.hpp
// Command-line front end. run_cli is the whole program; tools/qfix_cli.cpp
// only forwards main() to it so the commands stay testable in-process.
//
// Exit codes: 0 all asserted checks pass, 1 a check or solver failed,
// 2 malformed input, 3 dimension cap exceeded (see --allow-large).

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qfix {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitTooLarge = 3;

inline constexpr long kOperatorDimCap = 256;
inline constexpr long kSuperopDimCap = 64;

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace qfix
