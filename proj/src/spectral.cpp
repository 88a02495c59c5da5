// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/spectral.hpp"

#include <cmath>

#include "swbss/errors.hpp"
#include "swbss/fft.hpp"

namespace swbss::spectral {

void StftConfig::validate() const {
  if (frame_len <= 0 || hop <= 0) throw ConfigError("stft: frame_len and hop must be positive");
  if (hop > frame_len) throw ConfigError("stft: hop must not exceed frame_len");
  if (frame_len % hop != 0) throw ConfigError("stft: hop must divide frame_len");
  if (window != "hann") throw ConfigError("stft: unsupported window '" + window + "'");
}

std::vector<double> make_window(const StftConfig& cfg) {
  cfg.validate();
  std::vector<double> w(cfg.frame_len);
  for (int n = 0; n < cfg.frame_len; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / cfg.frame_len);
  }
  return w;
}

int num_frames(Eigen::Index num_samples, const StftConfig& cfg) {
  Eigen::Index padded = num_samples + cfg.frame_len - cfg.hop;
  return static_cast<int>((padded + cfg.hop - 1) / cfg.hop);
}

CTensor stft(const Waveform& w, const StftConfig& cfg) {
  cfg.validate();
  if (w.channels() == 0 || w.num_samples() == 0) throw ConfigError("stft: empty waveform");
  if (!w.samples.allFinite()) throw ConfigError("stft: non-finite samples");

  const int channels = w.channels();
  const Eigen::Index len = w.num_samples();
  const int pad = cfg.frame_len - cfg.hop;
  const int frames = num_frames(len, cfg);
  const int bins = cfg.frame_len / 2 + 1;
  const std::vector<double> win = make_window(cfg);

  CTensor out(channels, frames, bins);
  RealFft fft(cfg.frame_len);
  std::vector<double> frame(cfg.frame_len);
  std::vector<cd> spec(bins);

  for (int m = 0; m < channels; ++m) {
    for (int t = 0; t < frames; ++t) {
      const Eigen::Index start = static_cast<Eigen::Index>(t) * cfg.hop - pad;
      for (int n = 0; n < cfg.frame_len; ++n) {
        const Eigen::Index s = start + n;
        frame[n] = (s >= 0 && s < len) ? w.samples(m, s) * win[n] : 0.0;
      }
      fft.forward(frame.data(), spec.data());
      for (int f = 0; f < bins; ++f) out(m, t, f) = spec[f];
    }
  }
  return out;
}

Waveform istft(const CTensor& x, const StftConfig& cfg, Eigen::Index out_len,
               double sample_rate) {
  cfg.validate();
  const int bins = cfg.frame_len / 2 + 1;
  if (x.bins() != bins) throw ConfigError("istft: tensor bins inconsistent with config");

  const int channels = x.rows();
  const int frames = x.frames();
  const int pad = cfg.frame_len - cfg.hop;
  const Eigen::Index buf_len =
      static_cast<Eigen::Index>(frames - 1) * cfg.hop + cfg.frame_len;
  const std::vector<double> win = make_window(cfg);

  // Window-power normalization computed once; shared by all channels.
  std::vector<double> norm(buf_len, 0.0);
  for (int t = 0; t < frames; ++t) {
    const Eigen::Index start = static_cast<Eigen::Index>(t) * cfg.hop;
    for (int n = 0; n < cfg.frame_len; ++n) norm[start + n] += win[n] * win[n];
  }

  Waveform out;
  out.sample_rate = sample_rate;
  out.samples = Eigen::MatrixXd::Zero(channels, out_len);

  RealFft fft(cfg.frame_len);
  std::vector<cd> spec(bins);
  std::vector<double> frame(cfg.frame_len);
  std::vector<double> acc(buf_len);

  for (int m = 0; m < channels; ++m) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int t = 0; t < frames; ++t) {
      for (int f = 0; f < bins; ++f) spec[f] = x(m, t, f);
      fft.inverse(spec.data(), frame.data());
      const Eigen::Index start = static_cast<Eigen::Index>(t) * cfg.hop;
      for (int n = 0; n < cfg.frame_len; ++n) acc[start + n] += frame[n] * win[n];
    }
    for (Eigen::Index s = 0; s < out_len; ++s) {
      const Eigen::Index pos = s + pad;
      if (pos < buf_len && norm[pos] > 1e-12) out.samples(m, s) = acc[pos] / norm[pos];
    }
  }
  return out;
}

}  // namespace swbss::spectral
