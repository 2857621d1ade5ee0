// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace usct::cli {

/// Exit code for command-line usage errors; library errors map through
/// usct::exit_code().
inline constexpr int kUsageExit = 2;
inline constexpr int kInternalExit = 1;

/// Runs the `usct` command line. Results go to `out`, logs and errors to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace usct::cli
