// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "swbss/atf_init.hpp"
#include "swbss/rng.hpp"
#include "swbss/spectral.hpp"
#include "swbss/tensor.hpp"

namespace swbss::sim {

struct SceneSpec {
  int num_sources = 2;
  int num_mics = 2;
  double duration_s = 10.0;
  double rt60_s = 0.5;
  double snr_db = 20.0;  // reverberant SNR; +inf disables noise
  double direct_to_early_ms = 50.0;
  double sample_rate = 16000.0;
  uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// Impulse responses of one source to all mics, split at the early/late
// boundary (direct arrival + direct_to_early_ms). early and late cover the
// same absolute time axis, so early + late is the full response.
struct Rir {
  Eigen::MatrixXd early;  // mics x taps
  Eigen::MatrixXd late;
  int direct_delay = 0;   // samples to the earliest direct arrival
};

// Full ground truth for one synthetic scene. The decomposition
// mixture = sum desired + sum late + noise holds sample-exact.
struct SceneTruth {
  Waveform mixture;                   // M channels
  std::vector<Waveform> desired;      // per source, M channels (direct+early)
  std::vector<Waveform> late;         // per source, M channels
  Waveform noise;                     // M channels
  std::vector<Waveform> dry;          // per source, 1 channel
  std::vector<Rir> rirs;              // per source
  std::vector<Eigen::Vector3d> mic_pos;
  SceneSpec spec;
};

Rir gen_rir(const SceneSpec& spec, int source_idx);
SceneTruth gen_scene(const SceneSpec& spec);

// Early-part acoustic transfer functions: the frame_len-point DFT of each
// source's early impulse response, one M-vector per (source, bin).
atf_init::AtfSet truth_atf(const SceneTruth& scene, const spectral::StftConfig& cfg,
                           int ref_channel = 0);

}  // namespace swbss::sim
