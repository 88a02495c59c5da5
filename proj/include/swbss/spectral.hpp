// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "swbss/tensor.hpp"

namespace swbss::spectral {

// Short-time analysis parameters. Defaults are 32 ms frames with an 8 ms
// shift at 16 kHz.
struct StftConfig {
  int frame_len = 512;
  int hop = 128;
  std::string window = "hann";

  void validate() const;  // throws ConfigError
};

// Periodic analysis window of cfg.frame_len samples.
std::vector<double> make_window(const StftConfig& cfg);

// Multichannel STFT, output indexed (channel, frame, bin) with
// F = frame_len/2 + 1 bins. The signal is zero padded by frame_len - hop
// samples at the start and frames keep starting every hop while any padded
// sample remains, so T = ceil((len + frame_len - hop) / hop).
CTensor stft(const Waveform& w, const StftConfig& cfg);

// Weighted overlap-add inverse with the matched synthesis window and
// per-sample window-power normalization; reconstructs interior samples of
// an unmodified spectrum exactly up to rounding.
Waveform istft(const CTensor& x, const StftConfig& cfg, Eigen::Index out_len,
               double sample_rate = 16000.0);

// Frame count produced by stft() for a signal of the given length.
int num_frames(Eigen::Index num_samples, const StftConfig& cfg);

}  // namespace swbss::spectral
