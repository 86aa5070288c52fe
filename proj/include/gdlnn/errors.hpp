#pragma once

#include <stdexcept>
#include <string>

namespace gdlnn {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// GDL text that is not a program (bad token, undeclared variable, ...).
struct ParseError : Error {
    ParseError(const std::string& msg, int line, int col)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
          line(line), col(col) {}
    int line;
    int col;
};

// A structurally invalid Program or Graph built through the API.
struct ValidationError : Error {
    using Error::Error;
};

// Dataset files: missing, malformed, or internally inconsistent.
struct DataError : Error {
    using Error::Error;
};

// Model files: truncated, wrong version, malformed numbers.
struct ModelIoError : Error {
    using Error::Error;
};

// The matcher visited more partial assignments than the caller allowed.
struct BudgetExceededError : Error {
    explicit BudgetExceededError(long long budget)
        : Error("match budget of " + std::to_string(budget) + " assignments exceeded"),
          budget(budget) {}
    long long budget;
};

// Bad run configuration (CLI flags, hyperparameters outside the allowed grids).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace gdlnn
