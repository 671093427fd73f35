#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace multigame {

// Every library error derives from Error so callers (the CLI in particular)
// can separate configuration problems from solver failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    std::size_t offset;
    ParseError(std::size_t at, const std::string& what)
        : Error("parse error at offset " + std::to_string(at) + ": " + what), offset(at) {}
};

struct UnknownIdentifier : ParseError {
    std::string name;
    UnknownIdentifier(std::size_t at, const std::string& ident)
        : ParseError(at, "unknown identifier '" + ident + "'"), name(ident) {}
};

struct EvalDomain : Error {
    using Error::Error;
};

struct NotComparable : Error {
    using Error::Error;
};

struct BadOperator : Error {
    using Error::Error;
};

struct NotHomogeneous : Error {
    double lambda;
    explicit NotHomogeneous(double lam, const std::string& detail)
        : Error("Hamiltonian is not positively homogeneous: " + detail), lambda(lam) {}
};

struct MonotonicityViolated : Error {
    using Error::Error;
};

struct ConfigError : Error {
    std::string field;
    ConfigError(std::string path, const std::string& what)
        : Error("config error at '" + path + "': " + what), field(std::move(path)) {}
};

struct BadSlice : Error {
    using Error::Error;
};

} // namespace multigame
