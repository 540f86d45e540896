#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jocot {

/// Bad argument to a pure operation (out-of-range rate, label, epoch, ...).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inconsistent shapes or configuration values.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise unusable input data.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A loss or gradient evaluated to a non-finite value.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::size_t sample)
        : std::runtime_error(what + " (sample " + std::to_string(sample) + ")"), sample_(sample) {}

    std::size_t sample() const noexcept { return sample_; }

private:
    std::size_t sample_;
};

/// A metric whose denominator is empty.
class UndefinedMetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// CSV or checkpoint content that does not follow its schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training finished but produced no usable result (e.g. empty clean set).
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace jocot
