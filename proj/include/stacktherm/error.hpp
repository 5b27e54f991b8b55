#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stacktherm {

enum class ErrorKind {
    InvalidResolution,
    Parse,
    DuplicateName,
    Overlap,
    OutOfOutline,
    CoverageGap,
    EmptyInput,
    Domain,
    MissingSource,
    LengthMismatch,
    Geometry,
    InvalidPattern,
    Assembly,
    FloatingNetwork,
    PatternMismatch,
    Validation,
    NotFound,
    Conflict,
    Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure in the library surfaces as an Error. `line` is 1-based when
/// the error refers to a text input, 0 otherwise; `names` carries the offending
/// identifiers (block names, layer indices, rule sources).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::vector<std::string> names = {},
          int line = 0);

    ErrorKind kind() const noexcept { return kind_; }
    int line() const noexcept { return line_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

private:
    ErrorKind kind_;
    int line_;
    std::vector<std::string> names_;
};

}  // namespace stacktherm
