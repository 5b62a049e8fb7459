#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace symadex::cli {

enum ExitCode : int { kVerified = 0, kUnverified = 1, kNoAttacks = 2, kInputError = 3 };

/// Runs one command line (args[0] is the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Flat key=value lines ('#' comments) turned into "--key value" arguments.
std::vector<std::string> config_arguments(const std::string& text);

}  // namespace symadex::cli
