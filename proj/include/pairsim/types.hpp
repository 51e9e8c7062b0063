#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace pairsim {

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
// Row-major with sorted inner indices so identically-built operators compare bit-stably.
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad arguments, malformed specs/configs, unsupported dimensions.
struct ValidationError : Error {
  using Error::Error;
};

// A construction would be clipped by the local occupation cutoff.
struct CutoffOverflowError : Error {
  using Error::Error;
};

// Integrator stiffness, non-saturated series, failed fits.
struct ConvergenceError : Error {
  using Error::Error;
};

}  // namespace pairsim
