#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// n×d array of points drawn from one distribution, one point per row.
using SampleSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised when inputs violate a documented contract (dimension mismatch,
/// invalid configuration, non-SPD covariance, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace adot
