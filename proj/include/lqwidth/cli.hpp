#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace lqwidth::cli {

enum ExitCode : int { kOk = 0, kParameterError = 1, kAssertionFailure = 2 };

/// "8..11" or "8,9,11" (or a mix, "4..6,9").
std::vector<unsigned> parse_levels(std::string_view text);
/// Comma-separated reals.
std::vector<double> parse_reals(std::string_view text);

/// Runs the tool; args excludes the program name. Tables go to files under
/// --out when given, else to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lqwidth::cli
