#pragma once

#include <iosfwd>

namespace hgf {

// Exit codes: 0 success, 1 a requested check failed, 2 usage or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hgf
