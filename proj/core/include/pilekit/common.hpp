#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pilekit {

inline constexpr const char* kVersion = "0.1.0";

// Default cap on derivative order supported by operators and kernels.
inline constexpr int kDefaultMaxOrder = 2;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A point is one row of an n x d matrix of sites.
using PointRef = Eigen::Ref<const Eigen::RowVectorXd>;

// Problem-spec or argument validation failure (CLI exit code 2).
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

// Factorization or other numerical failure (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pilekit
