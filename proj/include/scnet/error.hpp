#pragma once

#include <stdexcept>
#include <string>

namespace scnet {

// Operand shapes do not admit the requested operation.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed declarative input (network config, experiment file, CLI values).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A NaN/Inf appeared where the computation requires finite values.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Byte-level input (IDX files, snapshots) failed to parse.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// An oracle was asked to do more work than its configured cap allows.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scnet
