#pragma once

#include <iosfwd>

namespace skillshift::cli {

/// Runs one subcommand. Returns 0 on success, 1 for usage or input errors
/// and 2 for internal errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skillshift::cli
