#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fo2::cli {

// Runs one command line (without the program name). Results go to `out`,
// diagnostics to `err`. Exit codes: 0 success, 1 parse/semantic error,
// 2 unsupported feature, 3 internal consistency violation.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace fo2::cli
