#pragma once

// Command-line front end: synth | train | predict | eval.

#include <iosfwd>
#include <string>
#include <vector>

namespace gazelab::cli {

/// Runs one command line (args exclude the program name). Errors are written
/// to err as a single "error: <class>: <message>" line and give a nonzero
/// return value.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gazelab::cli
