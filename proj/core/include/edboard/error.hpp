#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace edboard {

/// Root of every error raised by the library. `code()` is a stable, machine-readable
/// identifier used by the HTTP API and CLI exit-code mapping.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Bad input or configuration. Carries the offending field names when known.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message, std::vector<std::string> fields = {})
        : Error("validation_error", message), fields_(std::move(fields)) {}

    [[nodiscard]] const std::vector<std::string>& fields() const noexcept { return fields_; }

private:
    std::vector<std::string> fields_;
};

class RangeError : public Error {
public:
    explicit RangeError(const std::string& message) : Error("range_error", message) {}
};

class DataGapError : public Error {
public:
    explicit DataGapError(const std::string& message) : Error("data_gap", message) {}
};

class DuplicateKeyError : public Error {
public:
    explicit DuplicateKeyError(const std::string& message) : Error("duplicate_key", message) {}
};

class DegenerateColumnError : public Error {
public:
    DegenerateColumnError(std::string column, const std::string& message)
        : Error("degenerate_column", message), column_(std::move(column)) {}

    [[nodiscard]] const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& message) : Error("not_found", message) {}
};

class ConflictError : public Error {
public:
    explicit ConflictError(const std::string& message) : Error("conflict", message) {}
};

class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& message)
        : Error("insufficient_data", message) {}
};

}  // namespace edboard
