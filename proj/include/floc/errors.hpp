#pragma once

// Error types shared across the library. All inherit from floc::Error so the
// CLI can map them onto exit codes in one place.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace floc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- input / configuration errors ---

class EmptyInput : public Error {
public:
    EmptyInput() : Error("empty input: no observations") {}
};

class TOutOfRange : public Error {
public:
    explicit TOutOfRange(double t)
        : Error("sampling point t=" + std::to_string(t) + " outside [0,1]"), t_(t) {}
    double t() const { return t_; }

private:
    double t_;
};

class NonFiniteValue : public Error {
public:
    NonFiniteValue() : Error("non-finite value in input") {}
    explicit NonFiniteValue(const std::string& what) : Error(what) {}
};

class InvalidTuning : public Error {
public:
    explicit InvalidTuning(const std::string& what) : Error(what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// --- numerical errors ---

class TooFewPoints : public Error {
public:
    explicit TooFewPoints(const std::string& what) : Error(what) {}
};

class OutOfDomain : public Error {
public:
    explicit OutOfDomain(const std::string& what) : Error(what) {}
};

class SingularSystem : public Error {
public:
    explicit SingularSystem(const std::string& what) : Error(what) {}
};

class AllFitsFailed : public Error {
public:
    explicit AllFitsFailed(const std::string& what) : Error(what) {}
};

class UnsupportedOrder : public Error {
public:
    explicit UnsupportedOrder(const std::string& what) : Error(what) {}
};

class ZeroFunction : public Error {
public:
    ZeroFunction() : Error("function is identically zero") {}
};

}  // namespace floc
