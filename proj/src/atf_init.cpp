// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/atf_init.hpp"

#include <cmath>

#include "swbss/errors.hpp"
#include "swbss/simulator.hpp"

namespace swbss::atf_init {

namespace {
constexpr double kMaskLo = 1e-4;
constexpr double kMaskHi = 1.0 - 1e-4;
}  // namespace

RTensor clip_masks(const RTensor& masks) {
  RTensor out = masks;
  for (int f = 0; f < out.bins(); ++f) {
    for (int t = 0; t < out.frames(); ++t) {
      for (int n = 0; n < out.rows(); ++n) {
        out(n, t, f) = std::clamp(out(n, t, f), kMaskLo, kMaskHi);
      }
    }
  }
  return out;
}

CTensor dereverb_for_init(const RTensor& gamma, const std::vector<CTensor>& z_states) {
  if (z_states.empty()) throw ConfigError("dereverb_for_init: no states");
  if (gamma.rows() != static_cast<int>(z_states.size())) {
    throw ConfigError("dereverb_for_init: gamma state count mismatch");
  }
  const CTensor& z0 = z_states.front();
  CTensor z(z0.rows(), z0.frames(), z0.bins());
  for (int f = 0; f < z.bins(); ++f) {
    for (int t = 0; t < z.frames(); ++t) {
      auto zv = z.frame_vec(t, f);
      for (int i = 0; i < gamma.rows(); ++i) {
        const double g = gamma(i, t, f);
        if (g == 0.0) continue;
        zv += g * z_states[i].frame_vec(t, f);
      }
    }
  }
  return z;
}

MaskedCovs masked_covariances(const CTensor& z, const RTensor& masks) {
  if (masks.frames() != z.frames() || masks.bins() != z.bins()) {
    throw ConfigError("masked_covariances: mask shape mismatch");
  }
  RTensor m = clip_masks(masks);
  const int n_src = m.rows();
  const int ch = z.rows();

  MaskedCovs covs;
  covs.num_sources = n_src;
  covs.bins = z.bins();
  covs.target.assign(static_cast<size_t>(n_src) * z.bins(),
                     Eigen::MatrixXcd::Zero(ch, ch));
  covs.interf.assign(static_cast<size_t>(n_src) * z.bins(),
                     Eigen::MatrixXcd::Zero(ch, ch));

  for (int f = 0; f < z.bins(); ++f) {
    std::vector<double> wsum(n_src, 0.0), vsum(n_src, 0.0);
    for (int t = 0; t < z.frames(); ++t) {
      auto zv = z.frame_vec(t, f);
      const Eigen::MatrixXcd outer = zv * zv.adjoint();
      for (int n = 0; n < n_src; ++n) {
        const double w = m(n, t, f);
        covs.target_at(n, f).noalias() += w * outer;
        covs.interf_at(n, f).noalias() += (1.0 - w) * outer;
        wsum[n] += w;
        vsum[n] += 1.0 - w;
      }
    }
    for (int n = 0; n < n_src; ++n) {
      covs.target_at(n, f) /= wsum[n];
      covs.interf_at(n, f) /= vsum[n];
    }
  }
  return covs;
}

AtfSet estimate_atf(const MaskedCovs& covs, int ref_channel,
                    const linalg::LoadingPolicy& p) {
  AtfSet atfs;
  atfs.num_sources = covs.num_sources;
  atfs.bins = covs.bins;
  atfs.ref_channel = ref_channel;
  atfs.channels = covs.target.empty()
                      ? 0
                      : static_cast<int>(covs.target.front().rows());
  atfs.a.resize(static_cast<size_t>(covs.num_sources) * covs.bins);

  for (int n = 0; n < covs.num_sources; ++n) {
    for (int f = 0; f < covs.bins; ++f) {
      const Eigen::MatrixXcd& gz = covs.target_at(n, f);
      const Eigen::MatrixXcd& gv = covs.interf_at(n, f);
      Eigen::VectorXcd a;
      try {
        a = gv * linalg::max_gen_eigvec(gz, gv, p);
      } catch (const NumericalError&) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
            0.5 * (gz + gz.adjoint()));
        a = es.eigenvectors().col(atfs.channels - 1);
      }
      // Phase anchored at the reference channel.
      cd pivot = a(ref_channel);
      if (std::abs(pivot) > 0.0) a *= std::conj(pivot) / std::abs(pivot);
      atfs.at(n, f) = a;
    }
  }
  return atfs;
}

SpatialInit mpdr_init(const CTensor& z, const AtfSet& atfs, int num_states,
                      Rng& rng, const linalg::LoadingPolicy& p) {
  const int m = z.rows();
  const int n_src = atfs.num_sources;
  if (n_src > m) throw ConfigError("mpdr_init: more sources than channels");

  SpatialInit init;
  init.sep = SeparationMatrices::identity(num_states, z.bins(), m);
  for (int j = 0; j < num_states; ++j) {
    RTensor alpha(n_src, z.frames(), z.bins());
    for (int f = 0; f < z.bins(); ++f) {
      for (int t = 0; t < z.frames(); ++t) {
        for (int n = 0; n < n_src; ++n) alpha(n, t, f) = rng.uniform(1.0 - 1e-3, 1.0 + 1e-3);
      }
    }
    init.alpha.push_back(std::move(alpha));
  }
  // Same normalization as the switch draws: weights sum to one over states.
  for (int f = 0; f < z.bins(); ++f) {
    for (int t = 0; t < z.frames(); ++t) {
      for (int n = 0; n < n_src; ++n) {
        double sum = 0.0;
        for (int j = 0; j < num_states; ++j) sum += init.alpha[j](n, t, f);
        for (int j = 0; j < num_states; ++j) init.alpha[j](n, t, f) /= sum;
      }
    }
  }

  for (int j = 0; j < num_states; ++j) {
    for (int f = 0; f < z.bins(); ++f) {
      for (int n = 0; n < n_src; ++n) {
        Eigen::MatrixXcd xi = Eigen::MatrixXcd::Zero(m, m);
        double wsum = 0.0;
        for (int t = 0; t < z.frames(); ++t) {
          const double w = init.alpha[j](n, t, f);
          auto zv = z.frame_vec(t, f);
          xi.noalias() += w * (zv * zv.adjoint());
          wsum += w;
        }
        xi /= wsum;
        const Eigen::VectorXcd& a = atfs.at(n, f);
        Eigen::VectorXcd xia = linalg::hermitian_solve(xi, a, p);
        cd denom = a.dot(xia);  // a^H Xi^-1 a, real positive for PD Xi
        if (!(std::abs(denom) > 0.0)) {
          init.sep.at(j, f).col(n) = Eigen::VectorXcd::Unit(m, n);
          continue;
        }
        init.sep.at(j, f).col(n) = std::conj(a(atfs.ref_channel)) * xia / denom;
      }
      // Noise columns stay at e_n from the identity initialization.
    }
  }
  return init;
}

RTensor init_variances_sg(const CTensor& z, const SpatialInit& init,
                          int num_sources, double eps) {
  const int m = z.rows();
  const int num_states = init.sep.num_states;
  RTensor lam(m, z.frames(), z.bins());
  for (int f = 0; f < z.bins(); ++f) {
    for (int t = 0; t < z.frames(); ++t) {
      auto zv = z.frame_vec(t, f);
      for (int n = 0; n < m; ++n) {
        cd acc = 0.0;
        double wsum = 0.0;
        for (int j = 0; j < num_states; ++j) {
          const double w = n < num_sources ? init.alpha[j](n, t, f) : 1.0;
          acc += w * init.sep.at(j, f).col(n).dot(zv);
          wsum += w;
        }
        lam(n, t, f) = std::norm(acc / wsum) + eps;
      }
    }
  }
  return lam;
}

RTensor oracle_masks(const sim::SceneTruth& scene, const spectral::StftConfig& cfg,
                     int ref_channel) {
  cfg.validate();
  const int n_src = static_cast<int>(scene.desired.size());
  const double fs = scene.spec.sample_rate;

  std::vector<CTensor> d_spec;
  for (int n = 0; n < n_src; ++n) {
    Waveform ref{scene.desired[n].samples.row(ref_channel), fs};
    d_spec.push_back(spectral::stft(ref, cfg));
  }
  // Everything that is not a desired signal at the reference mic counts as
  // interference in the denominator.
  Eigen::MatrixXd resid = scene.noise.samples.row(ref_channel);
  for (const Waveform& l : scene.late) resid += l.samples.row(ref_channel);
  CTensor r_spec = spectral::stft(Waveform{resid, fs}, cfg);

  RTensor masks(n_src, d_spec[0].frames(), d_spec[0].bins());
  for (int f = 0; f < masks.bins(); ++f) {
    for (int t = 0; t < masks.frames(); ++t) {
      double denom = std::norm(r_spec(0, t, f)) + 1e-30;
      for (int n = 0; n < n_src; ++n) denom += std::norm(d_spec[n](0, t, f));
      for (int n = 0; n < n_src; ++n) {
        masks(n, t, f) = std::norm(d_spec[n](0, t, f)) / denom;
      }
    }
  }
  return masks;
}

}  // namespace swbss::atf_init
