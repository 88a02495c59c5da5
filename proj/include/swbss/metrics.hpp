// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "swbss/model.hpp"

namespace swbss::metrics {

// Total log-likelihood of the switching model with the fine (frequency
// dependent) variances: per selected state,
//   -sum_n(|y_n|^2 / lambda + log lambda) + 2 log|det W|.
// Returns -inf when a selected state's matrix is singular.
double log_likelihood(const ModelState& s);

// Same objective with the coarse frequency-independent variances
// substituted; used to verify ascent of the separation-matrix updates.
double log_likelihood_coarse(const ModelState& s);

// Frequency-weighted segmental SNR in dB between a processed estimate and
// its aligned reference (mono). 25 ms Hann segments at 50% overlap, 23
// mel-spaced bands from 125 Hz to Nyquist, per-band SNR of band energy over
// band error energy clamped to [-10, 35] dB, weighted by the reference
// band magnitude^0.2, averaged over bands then over non-silent segments.
double fwssnr_db(const Waveform& est, const Waveform& ref);

// Energy-ratio SIR via least-squares projection of est onto the reference
// signal subspace; capped at 60 dB.
double sir_db(const Eigen::VectorXd& est, const std::vector<Eigen::VectorXd>& refs,
              int target);

// SIR(est) - SIR(mixture at the reference microphone), both against the
// same target.
double sir_improvement_db(const Eigen::VectorXd& est,
                          const std::vector<Eigen::VectorXd>& refs, int target,
                          const Eigen::VectorXd& mix_ref);

}  // namespace swbss::metrics
