#pragma once

#include <stdexcept>
#include <string>

namespace ucl {

/// Invalid configuration or parameter; maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed file contents (traces, snapshots, checkpoints).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A metric was requested over an empty evaluation set.
class MetricError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace ucl
