#pragma once

#include <stdexcept>
#include <string>

namespace psct {

/// Malformed or inconsistent input data: trace files, VCD dumps, sidecars.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration or contract violation by the caller.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace psct
