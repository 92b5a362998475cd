#pragma once

#include <stdexcept>
#include <string>

namespace qsens {

/// Invalid run configuration (bad grid, bad roles, malformed config file).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or unusable input data (parse failures, gaps, too few rows).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rank deficiency, ill-conditioning, or solver failure.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg,
                            double condition_number = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(msg), condition_number(condition_number) {}

    double condition_number;
};

/// Too many failed replicates for a reliable band.
class BootstrapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qsens
