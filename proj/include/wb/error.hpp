#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wb {

/// Base class for every error raised by the workbench.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    /// Short machine-readable category used in JSON diagnostics.
    virtual const char* kind() const noexcept { return "error"; }
};

/// Malformed input text. `position` is a byte offset into the source.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t position)
        : Error(what + " at offset " + std::to_string(position)), position_(position) {}
    std::size_t position() const noexcept { return position_; }
    const char* kind() const noexcept override { return "syntax"; }

private:
    std::size_t position_;
};

/// Ill-sorted term or formula; `subterm` renders the offending piece.
class SortError : public Error {
public:
    SortError(const std::string& what, std::string subterm)
        : Error(what + (subterm.empty() ? std::string() : " in '" + subterm + "'")),
          subterm_(std::move(subterm)) {}
    const std::string& subterm() const noexcept { return subterm_; }
    const char* kind() const noexcept override { return "sort"; }

private:
    std::string subterm_;
};

/// A truncated computation ran out of known digits.
class PrecisionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "precision"; }
};

/// A value or argument lies outside the domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain"; }
};

/// A configured budget or cap was exceeded.
class ResourceError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "resource"; }
};

/// A definable function could not be resolved to a single value.
class UnresolvedError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "unresolved"; }
};

} // namespace wb
