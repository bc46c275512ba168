#pragma once

#include <stdexcept>
#include <string>

namespace exarray {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Subset indices were unsorted or repeated.
class CanonicalizationError : public Error {
public:
    using Error::Error;
};

class ArityError : public Error {
public:
    using Error::Error;
};

/// An argument fell outside the operation's domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A value or set leaf does not belong to the value space it is used with.
class TypingError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// A representation function asked for a latent that was not supplied.
class IncompleteAssignmentError : public Error {
public:
    using Error::Error;
};

class SpecValidationError : public Error {
public:
    using Error::Error;
};

class InjectivityError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

/// Malformed JSON input. `path` is a JSON pointer to the offending node.
class SchemaError : public Error {
public:
    SchemaError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace exarray
