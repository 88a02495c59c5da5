// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "swbss/linalg.hpp"
#include "swbss/model.hpp"

namespace swbss::swiva {

// Weighted dereverberated-signal covariances per (j, n, f), M x M, plus the
// per-(j, f) switching weight mass. States whose mass is zero are flagged.
struct WeightedCov {
  int num_j = 0, outputs = 0, bins = 0;
  std::vector<Eigen::MatrixXcd> scatter;
  std::vector<double> mass;          // per (j, f)
  std::vector<uint8_t> degenerate;   // per (j, f), mass == 0

  Eigen::MatrixXcd& at(int j, int n, int f) {
    return scatter[(static_cast<size_t>(j) * outputs + n) * bins + f];
  }
  const Eigen::MatrixXcd& at(int j, int n, int f) const {
    return scatter[(static_cast<size_t>(j) * outputs + n) * bins + f];
  }
  double mass_at(int j, int f) const { return mass[static_cast<size_t>(j) * bins + f]; }
  bool degenerate_at(int j, int f) const {
    return degenerate[static_cast<size_t>(j) * bins + f] != 0;
  }
};

// Fine-variance form: weights beta / lambda(n, t, f).
WeightedCov weighted_cov(const std::vector<CTensor>& z_states,
                         const SwitchWeights& b, const RTensor& lam_fine);
// Coarse form: lambda(n, t) broadcast over frequency.
WeightedCov weighted_cov(const std::vector<CTensor>& z_states,
                         const SwitchWeights& b, const Eigen::MatrixXd& lam_coarse);

// One iterative-projection sweep per (j, f): for n = 1..M sequentially,
// solve (W^H Sigma_n) w = e_n, then normalize to w^H Sigma_n w = 1. The
// covariances are used exactly as given; callers supply any loading or
// mass normalization. Bins where the solve is singular keep their previous
// matrix and are counted.
struct IpResult {
  SeparationMatrices sep;
  long aborted_bins = 0;
};

IpResult ip_update(const SeparationMatrices& sep, const WeightedCov& sigma);
bool ip_update_bin(Eigen::MatrixXcd& w, const Eigen::MatrixXcd* sigma_n, int count);

// Switched output y(t, f) = sum_{i,j} beta^{(i,j)} W^{(j)H} z^{(i)}.
CTensor compute_outputs(const std::vector<CTensor>& z_states,
                        const SeparationMatrices& sep, const SwitchWeights& b);

// lambda(n,t,f) = |y(n,t,f)|^2 + eps.
RTensor update_variances(const CTensor& y, double eps);

// Frequency mean of the fine variances.
Eigen::MatrixXd coarsen_variances(const RTensor& lam_fine);

// Exact per-(t, f) argmax of the per-state likelihood over the I x J grid
// (or its diagonal under the direct switching model). Ties resolve to the
// lowest (i, then j) index.
SwitchWeights update_switches(const std::vector<CTensor>& z_states,
                              const SeparationMatrices& sep,
                              const RTensor& lam_fine, bool diagonal_only = false);

// K inner sweeps of the separation-matrix stage: coarsen variances, IP
// update, outputs, variance update, switch update.
struct SwivaRoundOptions {
  int sweeps = 5;
  bool coarse_fine = true;
  bool diagonal_switch = false;
  double blend_weight = 0.1;
  double blend_min_mass = 8.0;  // frames of weight mass below which a state
                                // is blended with the all-state scatter
  linalg::LoadingPolicy loading;
};

struct SwivaRoundStats {
  long degenerate_states = 0;
  long aborted_bins = 0;
};

// The observer runs at sweep boundaries with step tags "w_pre", "w_post",
// "lambda_post", "beta_post"; the state is consistent at each call.
using StepObserver = std::function<void(std::string_view, const ModelState&)>;

SwivaRoundStats swiva_round(ModelState& s, const SwivaRoundOptions& opt,
                            const StepObserver& observe = {});

}  // namespace swbss::swiva
