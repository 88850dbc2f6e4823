#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace portnet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data: malformed rows, out-of-range coordinates, degenerate geometry.
/// Carries the offending field and source line when known.
class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what, std::string field = {},
                          std::optional<std::size_t> line = std::nullopt)
        : Error(compose(what, field, line)), field_(std::move(field)), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    static std::string compose(const std::string& what, const std::string& field,
                               std::optional<std::size_t> line) {
        std::string s;
        if (line) s += "line " + std::to_string(*line) + ": ";
        if (!field.empty()) s += "field '" + field + "': ";
        return s + what;
    }

    std::string field_;
    std::optional<std::size_t> line_;
};

class DegenerateGeometry : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// A caller broke an ordering or range contract.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// NaN/Inf in a forward value, gradient or loss.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace portnet
