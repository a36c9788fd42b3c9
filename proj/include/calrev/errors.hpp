#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace calrev {

// Base for every error the engine raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Input is syntactically valid but violates the expected schema
// (missing column, duplicate topic number, ...).
class SchemaError : public Error {
public:
    using Error::Error;
};

// Syntactically malformed input. line() is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

}  // namespace calrev
