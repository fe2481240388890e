#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rbuq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

/// Invalid or inconsistent user-provided configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure in a linear algebra kernel (CLI exit code 3).
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A model-level assumption was violated (e.g. loss of coercivity).
class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File format or I/O failure when reading/writing artifacts.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace rbuq
