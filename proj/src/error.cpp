#include "stacktherm/error.hpp"

namespace stacktherm {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidResolution: return "invalid-resolution";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::DuplicateName: return "duplicate-name";
        case ErrorKind::Overlap: return "overlap";
        case ErrorKind::OutOfOutline: return "out-of-outline";
        case ErrorKind::CoverageGap: return "coverage-gap";
        case ErrorKind::EmptyInput: return "empty-input";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::MissingSource: return "missing-source";
        case ErrorKind::LengthMismatch: return "length-mismatch";
        case ErrorKind::Geometry: return "geometry";
        case ErrorKind::InvalidPattern: return "invalid-pattern";
        case ErrorKind::Assembly: return "assembly";
        case ErrorKind::FloatingNetwork: return "floating-network";
        case ErrorKind::PatternMismatch: return "pattern-mismatch";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::NotFound: return "not-found";
        case ErrorKind::Conflict: return "conflict";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

namespace {
std::string decorate(int line, const std::string& message) {
    if (line <= 0) return message;
    return "line " + std::to_string(line) + ": " + message;
}
}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::vector<std::string> names, int line)
    : std::runtime_error(decorate(line, message)), kind_(kind), line_(line), names_(std::move(names)) {}

}  // namespace stacktherm
