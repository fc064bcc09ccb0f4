#pragma once
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pmsim {

using Complex = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;
using VectorXr = Eigen::VectorXd;
using MatrixXr = Eigen::MatrixXd;

inline constexpr double kHbar = 1.0;
inline constexpr double kMass = 1.0;

// Invalid configuration or precondition violation (CLI exit code 2).
struct ConfigError : std::runtime_error {
  std::vector<std::string> violations;
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
  ConfigError(const std::string& msg, std::vector<std::string> v)
      : std::runtime_error(msg), violations(std::move(v)) {}
};

// Numerical diagnostic failure: tolerances exceeded, solver breakdown (CLI exit code 3).
struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem / serialization failure (CLI exit code 4).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pmsim
