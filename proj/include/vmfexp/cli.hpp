#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vmfexp::cli {

/// Runs one command line; `args` excludes the program name.
///
/// Commands: simulate, realdata, bench, diversity. Tables go to --output (stdout by
/// default) as CSV or JSON; diagnostics go to `err`.
/// Exit codes: 0 success, 2 usage or validation error, 3 I/O error, 4 internal error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vmfexp::cli
