#pragma once

#include <iosfwd>

namespace qcity::cli {

// Entry point shared by the binary and the tests. Exit codes: 0 success,
// 1 fatal error, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace qcity::cli
