#pragma once

#include <stdexcept>
#include <string>

namespace nlchain {

/// Thrown by the tridiagonal solver when a pivot is (relatively) zero.
struct SingularMatrixError : std::runtime_error {
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when Newton iteration exceeds its iteration budget.
struct NewtonDivergedError : std::runtime_error {
    int step_index;   ///< time-step index at which the iteration failed (-1 if unknown)
    NewtonDivergedError(const std::string& what, int step = -1)
        : std::runtime_error(what), step_index(step) {}
};

/// Node or time index outside the range a diagnostic formula is defined on.
struct IndexError : std::out_of_range {
    explicit IndexError(const std::string& what) : std::out_of_range(what) {}
};

/// Malformed configuration file; carries the 1-based line number when known.
struct ParseError : std::runtime_error {
    int line;
    explicit ParseError(const std::string& what, int line_no = 0)
        : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + what
                                         : what),
          line(line_no) {}
};

/// Well-formed configuration that violates a model invariant; names the key.
struct ValidationError : std::runtime_error {
    std::string key;
    ValidationError(const std::string& key_name, const std::string& what)
        : std::runtime_error(key_name + ": " + what), key(key_name) {}
};

/// File could not be opened or written.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nlchain
