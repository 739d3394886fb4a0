#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace halfstokes {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed parameters, out-of-range options.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Failure that depends on the numbers, not on the shape of the input.
class NumericalError : public Error {
public:
    using Error::Error;
};

class BranchCutViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class GridTooSmall : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ZeroModeUnsupported : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ZeroLambda : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class InvalidRegime : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class HypothesisViolated : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class IncompatibleData : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class AsymmetricModeSet : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class SingularB : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class PoleHit : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class QuadratureUnderresolved : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class StabilityLimit : public NumericalError {
public:
    using NumericalError::NumericalError;
};

enum class WarningKind { truncation, stability };

struct Warning {
    WarningKind kind;
    std::string message;
};

/// Collects non-fatal conditions; operations take an optional pointer to one.
struct Diagnostics {
    std::vector<Warning> warnings;

    void warn(WarningKind kind, std::string message) { warnings.push_back({kind, std::move(message)}); }
    bool has(WarningKind kind) const {
        for (const auto& w : warnings)
            if (w.kind == kind) return true;
        return false;
    }
};

} // namespace halfstokes
