#pragma once

#include <stdexcept>
#include <string>

namespace llasso {

// Bad user input: malformed files, out-of-range parameters, shape mismatches.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine could not produce a result (singular systems, failed
// factorizations, degenerate statistics).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace llasso
