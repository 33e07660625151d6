#pragma once

#include <stdexcept>
#include <string>

namespace fispca {

/// Failure category. The CLI maps these onto its exit codes.
enum class ErrorKind { usage = 1, data = 2, model = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Bad input data: malformed files, missing classes, degenerate matrices.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Unreadable, corrupted or incompatible model files.
class ModelError : public Error {
public:
    explicit ModelError(const std::string& what) : Error(ErrorKind::model, what) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

}  // namespace fispca
