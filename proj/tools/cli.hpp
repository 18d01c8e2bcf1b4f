#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sbp::cli {

/// Runs one `sbp` command line (args excludes the program name).  Reports go
/// to `out`; failures are written to `err` as a JSON error object.
///
/// Exit codes: 0 success, 1 reproduce found a failing check, 2 usage error,
/// 3 model error, 4 numeric error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sbp::cli
