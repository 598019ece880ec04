#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace psplit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// Structural problem with dimensions or indices.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An inner solver produced a triple violating the relative-error criterion.
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No candidate of the half-space projection was feasible within tolerance.
struct InfeasibleProjectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A requested audit needs data the oracle does not provide.
struct UnsupportedCheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace psplit
