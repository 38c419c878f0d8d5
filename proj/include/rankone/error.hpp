#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankone {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto its exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes, modes or index sets that do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Inputs for which the requested quantity is undefined (zero tensor, zero
// matrix, every random start giving f = 0, ...).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// An alternating step hit an exactly degenerate configuration.
class BreakdownError : public Error {
public:
    using Error::Error;
};

// A documented precondition on the arguments was violated.
class ContractViolation : public Error {
public:
    using Error::Error;
};

class UnsupportedConfiguration : public Error {
public:
    using Error::Error;
};

// Numerical invariant broken beyond round-off. Indicates a bug, not bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace rankone
