#pragma once

#include <stdexcept>
#include <string>

namespace aet {

/// Base class for all library failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GridError : public Error {
public:
    using Error::Error;
};

class FieldError : public Error {
public:
    using Error::Error;
};

class AssemblyError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Text-format parse failure; carries the 1-based line number of the offending token.
class ParseError : public Error {
public:
    ParseError(const std::string& message, int line)
        : Error(message + " (line " + std::to_string(line) + ")"), line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

} // namespace aet
