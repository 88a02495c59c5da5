// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/metrics.hpp"

#include <cmath>
#include <limits>

#include "swbss/errors.hpp"
#include "swbss/spectral.hpp"

namespace swbss::metrics {

namespace {

constexpr double kWeightCutoff = 1e-300;
constexpr double kDetFloor = 1e-300;
constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename LambdaAt>
double log_likelihood_impl(const ModelState& s, LambdaAt&& lam_at) {
  const int m = s.channels();
  double total = 0.0;
  Eigen::VectorXcd yv(m);
  std::vector<double> log_det(s.sep.num_states);

  for (int f = 0; f < s.bins(); ++f) {
    for (int j = 0; j < s.sep.num_states; ++j) {
      double da = std::abs(s.sep.at(j, f).determinant());
      log_det[j] = da < kDetFloor ? -kInf : std::log(da);
    }
    for (int t = 0; t < s.frames(); ++t) {
      for (int i = 0; i < s.beta.num_i(); ++i) {
        for (int j = 0; j < s.beta.num_j(); ++j) {
          const double w = s.beta(i, j, t, f);
          if (w <= kWeightCutoff) continue;
          if (std::isinf(log_det[j])) return -kInf;
          yv.noalias() = s.sep.at(j, f).adjoint() * s.z[i].frame_vec(t, f);
          double term = 2.0 * log_det[j];
          for (int n = 0; n < m; ++n) {
            const double lam = lam_at(n, t, f);
            term -= std::norm(yv(n)) / lam + std::log(lam);
          }
          total += w * term;
        }
      }
    }
  }
  return total;
}

}  // namespace

double log_likelihood(const ModelState& s) {
  return log_likelihood_impl(
      s, [&](int n, int t, int f) { return s.lam.fine(n, t, f); });
}

double log_likelihood_coarse(const ModelState& s) {
  if (s.lam.coarse.size() == 0) throw ConfigError("log_likelihood_coarse: no coarse variances");
  return log_likelihood_impl(
      s, [&](int n, int t, int) { return s.lam.coarse(n, t); });
}

double fwssnr_db(const Waveform& est, const Waveform& ref) {
  if (est.channels() != 1 || ref.channels() != 1) {
    throw ConfigError("fwssnr: mono signals required");
  }
  const Eigen::Index len = std::min(est.num_samples(), ref.num_samples());
  if (len <= 0) throw ConfigError("fwssnr: empty signals");

  const double fs = ref.sample_rate;
  spectral::StftConfig cfg;
  cfg.frame_len = static_cast<int>(std::lround(0.025 * fs));
  cfg.frame_len -= cfg.frame_len % 2;
  cfg.hop = cfg.frame_len / 2;

  Waveform e1{est.samples.leftCols(len), fs};
  Waveform r1{ref.samples.leftCols(len), fs};
  CTensor se = spectral::stft(e1, cfg);
  CTensor sr = spectral::stft(r1, cfg);

  const int bins = se.bins();
  constexpr int kBands = 23;
  constexpr double kClampLo = -10.0, kClampHi = 35.0;
  constexpr double kWeightExp = 0.2;
  const double f_lo = 125.0, f_hi = fs / 2.0;

  // Triangular filters equally spaced on the mel scale.
  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto inv_mel = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  std::vector<double> edges(kBands + 2);
  for (int b = 0; b < kBands + 2; ++b) {
    edges[b] = inv_mel(mel(f_lo) + (mel(f_hi) - mel(f_lo)) * b / (kBands + 1));
  }
  Eigen::MatrixXd filters = Eigen::MatrixXd::Zero(kBands, bins);
  for (int b = 0; b < kBands; ++b) {
    for (int k = 0; k < bins; ++k) {
      double hz = k * fs / cfg.frame_len;
      if (hz <= edges[b] || hz >= edges[b + 2]) continue;
      filters(b, k) = hz <= edges[b + 1]
                          ? (hz - edges[b]) / (edges[b + 1] - edges[b])
                          : (edges[b + 2] - hz) / (edges[b + 2] - edges[b + 1]);
    }
  }

  // Silence threshold relative to the loudest segment.
  std::vector<double> seg_energy(se.frames(), 0.0);
  double max_energy = 0.0;
  for (int t = 0; t < sr.frames(); ++t) {
    double e = 0.0;
    for (int k = 0; k < bins; ++k) e += std::norm(sr(0, t, k));
    seg_energy[t] = e;
    max_energy = std::max(max_energy, e);
  }
  const double silence = 1e-10 * max_energy;

  double sum = 0.0;
  int segments = 0;
  for (int t = 0; t < sr.frames(); ++t) {
    if (seg_energy[t] <= silence) continue;
    double num = 0.0, den = 0.0;
    for (int b = 0; b < kBands; ++b) {
      double band_ref = 0.0, band_err = 0.0;
      for (int k = 0; k < bins; ++k) {
        const double h = filters(b, k);
        if (h <= 0.0) continue;
        band_ref += h * std::norm(sr(0, t, k));
        band_err += h * std::norm(sr(0, t, k) - se(0, t, k));
      }
      if (band_ref <= 0.0) continue;
      double snr = band_err <= 0.0 ? kClampHi
                                   : 10.0 * std::log10(band_ref / band_err);
      snr = std::clamp(snr, kClampLo, kClampHi);
      const double weight = std::pow(std::sqrt(band_ref), kWeightExp);
      num += weight * snr;
      den += weight;
    }
    if (den <= 0.0) continue;
    sum += num / den;
    ++segments;
  }
  if (segments == 0) throw ConfigError("fwssnr: reference is silent");
  return sum / segments;
}

namespace {

// BSS-eval style decomposition: target component is the projection onto the
// target reference alone, interference the remainder of the projection onto
// the span of all references.
double sir_of(const Eigen::VectorXd& sig, const std::vector<Eigen::VectorXd>& refs,
              int target) {
  const int n = static_cast<int>(refs.size());
  const Eigen::Index len = sig.size();
  Eigen::MatrixXd gram(n, n);
  Eigen::VectorXd rhs(n);
  for (int a = 0; a < n; ++a) {
    if (refs[a].size() != len) throw ConfigError("sir: length mismatch");
    for (int b = 0; b < n; ++b) gram(a, b) = refs[a].dot(refs[b]);
    rhs(a) = refs[a].dot(sig);
  }
  if (gram(target, target) <= 0.0) throw ConfigError("sir: zero-energy reference");
  gram.diagonal().array() += 1e-12 * gram.diagonal().mean();

  Eigen::VectorXd coef = gram.ldlt().solve(rhs);
  Eigen::VectorXd s_target = (rhs(target) / gram(target, target)) * refs[target];
  Eigen::VectorXd e_interf = -s_target;
  for (int a = 0; a < n; ++a) e_interf += coef(a) * refs[a];

  const double pt = s_target.squaredNorm();
  const double pi = e_interf.squaredNorm();
  constexpr double kCap = 60.0;
  if (pi <= 0.0 || pt / pi > std::pow(10.0, kCap / 10.0)) return kCap;
  return 10.0 * std::log10(pt / pi);
}

}  // namespace

double sir_db(const Eigen::VectorXd& est, const std::vector<Eigen::VectorXd>& refs,
              int target) {
  return sir_of(est, refs, target);
}

double sir_improvement_db(const Eigen::VectorXd& est,
                          const std::vector<Eigen::VectorXd>& refs, int target,
                          const Eigen::VectorXd& mix_ref) {
  return sir_of(est, refs, target) - sir_of(mix_ref, refs, target);
}

}  // namespace swbss::metrics
