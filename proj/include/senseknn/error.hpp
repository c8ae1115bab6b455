#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace senseknn {

/// Base class of every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (XML, JSONL). Carries the byte offset of the failure.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Well-formed input that violates an annotation invariant.
class AnnotationError : public Error {
public:
    using Error::Error;
};

/// Binary file (CWE1 store, index file) does not follow its format.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Vector lengths disagree with each other or with an index.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Input outside the mathematical domain of an operation (e.g. zero-norm vector).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A word key or instance key that must exist does not.
class LookupError : public Error {
public:
    using Error::Error;
};

}  // namespace senseknn
