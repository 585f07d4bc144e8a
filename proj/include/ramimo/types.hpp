#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ramimo {

using cxd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Thrown when a computed quantity violates a consistency bound that the
/// closed forms guarantee (e.g. a distortion covariance that is not PSD).
class numerical_error : public std::runtime_error {
  public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown on malformed or inconsistent run configuration.
class config_error : public std::runtime_error {
  public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ramimo
