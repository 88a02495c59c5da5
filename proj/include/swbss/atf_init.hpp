// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "swbss/linalg.hpp"
#include "swbss/model.hpp"
#include "swbss/rng.hpp"
#include "swbss/spectral.hpp"

namespace swbss::sim {
struct SceneTruth;
}

namespace swbss::atf_init {

// TF masks Omega(n, t, f) in [0, 1]; clipped away from the endpoints before
// use so mask-weighted denominators stay positive.
using MaskTensor = RTensor;

RTensor clip_masks(const RTensor& masks);

// Acoustic transfer function estimates, one M-vector per (source, bin),
// phase normalized at the reference channel.
struct AtfSet {
  int num_sources = 0, channels = 0, bins = 0;
  int ref_channel = 0;
  std::vector<Eigen::VectorXcd> a;

  Eigen::VectorXcd& at(int n, int f) { return a[static_cast<size_t>(n) * bins + f]; }
  const Eigen::VectorXcd& at(int n, int f) const {
    return a[static_cast<size_t>(n) * bins + f];
  }
};

// Gather of the selected MCLP state's dereverberated signal,
// z = sum_i gamma^{(i)} z^{(i)}.
CTensor dereverb_for_init(const RTensor& gamma, const std::vector<CTensor>& z_states);

// Mask-weighted normalized scatter matrices of the target source and of the
// interference, per (n, f).
struct MaskedCovs {
  int num_sources = 0, bins = 0;
  std::vector<Eigen::MatrixXcd> target;
  std::vector<Eigen::MatrixXcd> interf;

  Eigen::MatrixXcd& target_at(int n, int f) {
    return target[static_cast<size_t>(n) * bins + f];
  }
  const Eigen::MatrixXcd& target_at(int n, int f) const {
    return target[static_cast<size_t>(n) * bins + f];
  }
  Eigen::MatrixXcd& interf_at(int n, int f) {
    return interf[static_cast<size_t>(n) * bins + f];
  }
  const Eigen::MatrixXcd& interf_at(int n, int f) const {
    return interf[static_cast<size_t>(n) * bins + f];
  }
};

MaskedCovs masked_covariances(const CTensor& z, const RTensor& masks);

// ATF per source and bin from the dominant generalized eigenvector of the
// whitened target covariance, scaled back through the interference
// covariance. Falls back to the dominant eigenvector of the target scatter
// when the generalized problem breaks down.
AtfSet estimate_atf(const MaskedCovs& covs, int ref_channel,
                    const linalg::LoadingPolicy& p = {});

// Minimum-power distortionless-response initialization of the separation
// matrices: per state j, source columns use MPDR weights on randomly
// perturbed frame-weighted covariances; noise columns are unit vectors.
struct SpatialInit {
  SeparationMatrices sep;
  std::vector<RTensor> alpha;  // per j: (N, T, F) frame weights
};

SpatialInit mpdr_init(const CTensor& z, const AtfSet& atfs, int num_states,
                      Rng& rng, const linalg::LoadingPolicy& p = {});

// Variance initialization from the squared alpha-averaged beamformer
// outputs, floored at eps.
RTensor init_variances_sg(const CTensor& z, const SpatialInit& init,
                          int num_sources, double eps);

// Ideal-ratio masks computed from simulator ground truth at the reference
// channel; stands in for an external mask estimator.
RTensor oracle_masks(const sim::SceneTruth& scene, const spectral::StftConfig& cfg,
                     int ref_channel = 0);

}  // namespace swbss::atf_init
