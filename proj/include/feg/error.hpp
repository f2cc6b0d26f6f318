#pragma once

#include <stdexcept>
#include <string>

namespace feg {

// Error categories map one-to-one onto the C API status codes and the CLI
// exit codes (usage 1, data 2, internal 3).
enum class ErrorKind { usage = 1, data = 2, internal = 3, not_found = 4, undefined = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& what) : Error(ErrorKind::internal, what) {}
};

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& what) : Error(ErrorKind::not_found, what) {}
};

class UndefinedError : public Error {
public:
    explicit UndefinedError(const std::string& what) : Error(ErrorKind::undefined, what) {}
};

}  // namespace feg
