#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace specflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Bad run configuration or an infeasible/incompatible parameter set.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical procedure failed to converge or produced an unusable result.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace specflow
