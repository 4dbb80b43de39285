#pragma once

#include <stdexcept>
#include <string>

namespace pdrlab {

// Error taxonomy; the CLI maps these onto exit codes (config=1, io=2, numeric=3).

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed, empty or misaligned data (missing modality, non-monotone
// timestamps, insufficient samples). Exits with the config code.
class DataError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pdrlab
