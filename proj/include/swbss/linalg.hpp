// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>

#include "swbss/tensor.hpp"

namespace swbss::linalg {

// Diagonal loading relative to the mean diagonal magnitude, so the same
// policy works across signal levels.
struct LoadingPolicy {
  double relative_floor = 1e-8;
};

// Loading amount for a square matrix: relative_floor * mean(|Re diag(A)|).
double loading_epsilon(const Eigen::MatrixXcd& a, const LoadingPolicy& p);

// Solves (A + eps*I) X = B for Hermitian A via LDLT. Throws ConfigError on
// shape/finiteness violations.
Eigen::MatrixXcd hermitian_solve(const Eigen::MatrixXcd& a,
                                 const Eigen::MatrixXcd& b,
                                 const LoadingPolicy& p = {});

// Standard Kronecker product, shape (rA*rB) x (cA*cB).
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Column stacking: vec([a1,...,aM]) = [a1^T,...,aM^T]^T, and its inverse.
Eigen::VectorXcd vec(const Eigen::MatrixXcd& a);
Eigen::MatrixXcd unvec(const Eigen::VectorXcd& a, int rows, int cols);

// Dominant generalized eigenvector v of noise^-1 * sig computed through a
// Cholesky whitening of the loaded noise matrix. Unit L2 norm; phase fixed
// so the largest-magnitude entry is real positive.
Eigen::VectorXcd max_gen_eigvec(const Eigen::MatrixXcd& sig,
                                const Eigen::MatrixXcd& noise,
                                const LoadingPolicy& p = {});

}  // namespace swbss::linalg
