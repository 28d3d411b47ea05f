#pragma once

#include <stdexcept>
#include <string>

namespace mgcn {

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A caller broke an operation's precondition (empty mask, non-scalar root, ...).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Invalid user-supplied configuration value.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent dataset on disk.
class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mgcn
