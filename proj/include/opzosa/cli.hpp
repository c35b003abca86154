#pragma once

#include <iosfwd>

namespace opzosa {

/// Entry point of the `opzosa` command. Returns the process exit status.
/// Errors are reported on `err` as a single line:
///   error kind=<usage|config|run|io> key=<key or -> msg="<text>"
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace opzosa
