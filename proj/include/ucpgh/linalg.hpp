#pragma once

#include <Eigen/Dense>

#include "ucpgh/types.hpp"

namespace ucpgh {

struct HermitianEigen {
  Eigen::VectorXd values;     // ascending
  Eigen::MatrixXcd vectors;   // columns, empty unless requested
  int sweeps = 0;
};

// Cyclic Jacobi eigensolver for complex Hermitian matrices. Only the upper
// triangle is trusted; the input is symmetrized before iterating.
HermitianEigen hermitian_eigen(const Eigen::MatrixXcd& a, bool want_vectors = false,
                               double off_tol = 1e-12);

double min_eigenvalue(const Eigen::MatrixXcd& a);

// Largest |eigenvalue| of a Hermitian matrix.
double spectral_radius_hermitian(const Eigen::MatrixXcd& a);

// H^{-1/2} for a positive definite Hermitian H.
Eigen::MatrixXcd inverse_sqrt_psd(const Eigen::MatrixXcd& h, double floor = 1e-12);

bool all_finite(const Eigen::MatrixXcd& a);

}  // namespace ucpgh
