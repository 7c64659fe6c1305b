#pragma once

#include <ostream>

namespace ptree {

// Exit codes: 0 success, 2 config or usage error, 3 data error, 4 runtime failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ptree
