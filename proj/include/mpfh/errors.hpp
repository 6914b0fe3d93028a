#pragma once

#include <stdexcept>
#include <string>

namespace mpfh {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A queue would be driven at or beyond its service capacity.
class InstabilityError : public Error {
public:
    explicit InstabilityError(const std::string& msg) : Error(msg) {}
};

/// An argument is outside its mathematical domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A numeric search could not bracket a solution.
class NoSolutionError : public Error {
public:
    explicit NoSolutionError(const std::string& msg) : Error(msg) {}
};

// -- codec --------------------------------------------------------------

class EmptyFrameError : public Error {
public:
    explicit EmptyFrameError(const std::string& msg) : Error(msg) {}
};

class InsufficientBlocksError : public Error {
public:
    explicit InsufficientBlocksError(const std::string& msg) : Error(msg) {}
};

class MetadataMismatchError : public Error {
public:
    explicit MetadataMismatchError(const std::string& msg) : Error(msg) {}
};

/// Decode hit a singular submatrix. Impossible for a correct MDS
/// construction, so this signals an internal invariant violation.
class SingularMatrixError : public Error {
public:
    explicit SingularMatrixError(const std::string& msg) : Error(msg) {}
};

// -- scenario / config ---------------------------------------------------

/// Syntax error in a scenario document; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line)
        : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Semantic error in a scenario document; names the offending key.
class ValidationError : public Error {
public:
    ValidationError(const std::string& key, const std::string& msg)
        : Error(key + ": " + msg), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

class UnknownPresetError : public Error {
public:
    explicit UnknownPresetError(const std::string& msg) : Error(msg) {}
};

// -- sim / stats ----------------------------------------------------------

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class NoSamplesError : public Error {
public:
    explicit NoSamplesError(const std::string& msg) : Error(msg) {}
};

class EmptyInputError : public Error {
public:
    explicit EmptyInputError(const std::string& msg) : Error(msg) {}
};

}  // namespace mpfh
