// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "swbss/linalg.hpp"
#include "swbss/model.hpp"

namespace swbss::swwpe {

// Spatio-temporal covariances per (i, j, n, f): past_scatter accumulates
// weighted xbar*xbar^H (M(L-D) square), past_cross accumulates weighted
// xbar*x^H (M(L-D) x M), with weights beta / lambda_n.
struct PastCovariances {
  int num_i = 0, num_j = 0, outputs = 0, bins = 0;
  std::vector<Eigen::MatrixXcd> past_scatter;
  std::vector<Eigen::MatrixXcd> past_cross;

  Eigen::MatrixXcd& scatter_at(int i, int j, int n, int f) {
    return past_scatter[offset(i, j, n, f)];
  }
  const Eigen::MatrixXcd& scatter_at(int i, int j, int n, int f) const {
    return past_scatter[offset(i, j, n, f)];
  }
  Eigen::MatrixXcd& cross_at(int i, int j, int n, int f) {
    return past_cross[offset(i, j, n, f)];
  }
  const Eigen::MatrixXcd& cross_at(int i, int j, int n, int f) const {
    return past_cross[offset(i, j, n, f)];
  }

 private:
  size_t offset(int i, int j, int n, int f) const {
    return ((static_cast<size_t>(i) * num_j + j) * outputs + n) * bins + f;
  }
};

PastCovariances accumulate_cov(const CTensor& x, const CTensor& xbar,
                               const SwitchWeights& b, const RTensor& lam_fine);

// Normal-equation blocks of the prediction-filter update per (i, f):
// normal_matrix is the M^2(L-D) square Hermitian system matrix, normal_rhs
// the M(L-D) x M right-hand side before column stacking.
struct NormalEquations {
  int num_i = 0, bins = 0;
  std::vector<Eigen::MatrixXcd> normal_matrix;
  std::vector<Eigen::MatrixXcd> normal_rhs;

  Eigen::MatrixXcd& matrix_at(int i, int f) {
    return normal_matrix[static_cast<size_t>(i) * bins + f];
  }
  const Eigen::MatrixXcd& matrix_at(int i, int f) const {
    return normal_matrix[static_cast<size_t>(i) * bins + f];
  }
  Eigen::MatrixXcd& rhs_at(int i, int f) {
    return normal_rhs[static_cast<size_t>(i) * bins + f];
  }
  const Eigen::MatrixXcd& rhs_at(int i, int f) const {
    return normal_rhs[static_cast<size_t>(i) * bins + f];
  }
};

NormalEquations assemble_normal_eq(const PastCovariances& cov,
                                   const SeparationMatrices& sep);

PredictionFilters update_prediction_filters(const NormalEquations& eq,
                                            const linalg::LoadingPolicy& p = {});

// z^{(i)} = x - G^{(i)H} xbar for every MCLP state.
std::vector<CTensor> apply_mclp(const CTensor& x, const CTensor& xbar,
                                const PredictionFilters& filters);
CTensor apply_mclp_state(const CTensor& x, const CTensor& xbar,
                         const PredictionFilters& filters, int state);

// One plain switching-WPE iteration used during initialization: shared
// scalar variance per (t, f), per-state normal equations without the
// spatial model, then hard re-assignment of the MCLP switch by minimum
// dereverberated power. Soft input weights are allowed.
struct PlainSwwpeResult {
  PredictionFilters filters;
  std::vector<CTensor> z;
  RTensor gamma;  // hard one-hot after the step
};

PlainSwwpeResult plain_swwpe_step(const CTensor& x, const CTensor& xbar,
                                  const RTensor& gamma, double eps,
                                  const linalg::LoadingPolicy& p = {});

}  // namespace swbss::swwpe
