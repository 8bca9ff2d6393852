#pragma once

#include <ostream>

namespace gbcm::cli {

// Exit codes: 0 success, 1 domain error (message names the failed check),
// 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gbcm::cli
