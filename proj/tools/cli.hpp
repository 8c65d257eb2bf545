#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fprune::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;       // any other engine error
inline constexpr int kBadInput = 2;      // usage errors, unreadable or invalid inputs
inline constexpr int kShapeMismatch = 3; // inputs disagree with each other or with the plan

/// Runs one command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fprune::cli
