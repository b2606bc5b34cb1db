#pragma once

#include <stdexcept>
#include <string>

namespace kvtopo {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid geometry or mesh (precondition or invariant violation).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; carries the 1-based offending line.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Problem could not be assembled (bad coefficient, missing Dirichlet data...).
class AssemblyError : public Error {
public:
    using Error::Error;
};

/// Iterative solver failed; carries the last relative residual.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what + " (relative residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Configuration key missing or invalid; carries the offending key.
class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : Error(key + ": " + what), key_(key) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace kvtopo
