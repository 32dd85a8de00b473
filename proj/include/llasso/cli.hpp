#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace llasso::cli {

inline constexpr unsigned long long kDefaultSeed = 12345;

enum ExitCode : int {
    kOk = 0,
    kInputError = 2,
    kNumericalError = 3,
};

// Entry point behind the `llasso` executable. `args` excludes the program
// name. Normal output goes to `out` (or the --out file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace llasso::cli
