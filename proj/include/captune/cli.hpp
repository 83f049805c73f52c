#pragma once

#include <iosfwd>

namespace captune::cli {

// Entry point behind the `captune` binary. Exit codes: 0 ok, 1 internal or
// backend failure, 2 usage or validation error. Logs go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace captune::cli
