// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/swiva.hpp"

#include <cmath>
#include <limits>

#include "swbss/errors.hpp"

namespace swbss::swiva {

namespace {

constexpr double kWeightCutoff = 1e-300;
constexpr double kDetFloor = 1e-300;

template <typename LambdaAt>
WeightedCov weighted_cov_impl(const std::vector<CTensor>& z_states,
                              const SwitchWeights& b, LambdaAt&& lam_at,
                              int outputs) {
  if (z_states.empty()) throw ConfigError("weighted_cov: no MCLP states");
  if (static_cast<int>(z_states.size()) != b.num_i()) {
    throw ConfigError("weighted_cov: state count mismatch");
  }
  const CTensor& z0 = z_states.front();
  const int m = z0.rows();

  WeightedCov cov;
  cov.num_j = b.num_j();
  cov.outputs = outputs;
  cov.bins = z0.bins();
  cov.scatter.assign(static_cast<size_t>(cov.num_j) * outputs * cov.bins,
                     Eigen::MatrixXcd::Zero(m, m));
  cov.mass.assign(static_cast<size_t>(cov.num_j) * cov.bins, 0.0);
  cov.degenerate.assign(static_cast<size_t>(cov.num_j) * cov.bins, 0);

  for (int f = 0; f < z0.bins(); ++f) {
    for (int t = 0; t < z0.frames(); ++t) {
      for (int i = 0; i < b.num_i(); ++i) {
        auto zv = z_states[i].frame_vec(t, f);
        Eigen::MatrixXcd outer;
        bool have_outer = false;
        for (int j = 0; j < cov.num_j; ++j) {
          const double w = b(i, j, t, f);
          if (w <= kWeightCutoff) continue;
          if (!have_outer) {
            outer = zv * zv.adjoint();
            have_outer = true;
          }
          cov.mass[static_cast<size_t>(j) * cov.bins + f] += w;
          for (int n = 0; n < outputs; ++n) {
            cov.at(j, n, f).noalias() += (w / lam_at(n, t, f)) * outer;
          }
        }
      }
    }
  }
  for (int j = 0; j < cov.num_j; ++j) {
    for (int f = 0; f < cov.bins; ++f) {
      if (cov.mass_at(j, f) <= 0.0) {
        cov.degenerate[static_cast<size_t>(j) * cov.bins + f] = 1;
      }
    }
  }
  return cov;
}

}  // namespace

WeightedCov weighted_cov(const std::vector<CTensor>& z_states,
                         const SwitchWeights& b, const RTensor& lam_fine) {
  return weighted_cov_impl(
      z_states, b,
      [&](int n, int t, int f) { return lam_fine(n, t, f); }, lam_fine.rows());
}

WeightedCov weighted_cov(const std::vector<CTensor>& z_states,
                         const SwitchWeights& b,
                         const Eigen::MatrixXd& lam_coarse) {
  return weighted_cov_impl(
      z_states, b, [&](int n, int t, int) { return lam_coarse(n, t); },
      static_cast<int>(lam_coarse.rows()));
}

bool ip_update_bin(Eigen::MatrixXcd& w, const Eigen::MatrixXcd* sigma_n, int count) {
  const int m = static_cast<int>(w.rows());
  Eigen::MatrixXcd candidate = w;
  for (int n = 0; n < count && n < m; ++n) {
    const Eigen::MatrixXcd& sig = sigma_n[n];
    Eigen::MatrixXcd a = candidate.adjoint() * sig;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
    if (!lu.isInvertible()) return false;
    Eigen::VectorXcd wn = lu.solve(Eigen::VectorXcd::Unit(m, n));
    double denom = std::real(wn.dot(sig * wn));
    if (!(denom > 0.0) || !std::isfinite(denom)) return false;
    wn /= std::sqrt(denom);
    if (!wn.allFinite()) return false;
    candidate.col(n) = wn;
  }
  w = candidate;
  return true;
}

IpResult ip_update(const SeparationMatrices& sep, const WeightedCov& sigma) {
  IpResult res;
  res.sep = sep;
  std::vector<Eigen::MatrixXcd> sig_n(sigma.outputs);
  for (int f = 0; f < sep.bins; ++f) {
    for (int j = 0; j < sep.num_states; ++j) {
      for (int n = 0; n < sigma.outputs; ++n) sig_n[n] = sigma.at(j, n, f);
      if (!ip_update_bin(res.sep.at(j, f), sig_n.data(), sigma.outputs)) {
        res.sep.at(j, f) = sep.at(j, f);
        ++res.aborted_bins;
      }
    }
  }
  return res;
}

CTensor compute_outputs(const std::vector<CTensor>& z_states,
                        const SeparationMatrices& sep, const SwitchWeights& b) {
  const CTensor& z0 = z_states.front();
  const int m = z0.rows();
  CTensor y(m, z0.frames(), z0.bins());
  for (int f = 0; f < z0.bins(); ++f) {
    for (int t = 0; t < z0.frames(); ++t) {
      auto yv = y.frame_vec(t, f);
      for (int i = 0; i < b.num_i(); ++i) {
        for (int j = 0; j < b.num_j(); ++j) {
          const double w = b(i, j, t, f);
          if (w <= kWeightCutoff) continue;
          yv.noalias() += w * (sep.at(j, f).adjoint() * z_states[i].frame_vec(t, f));
        }
      }
    }
  }
  return y;
}

RTensor update_variances(const CTensor& y, double eps) {
  RTensor lam(y.rows(), y.frames(), y.bins());
  for (int f = 0; f < y.bins(); ++f) {
    for (int t = 0; t < y.frames(); ++t) {
      for (int n = 0; n < y.rows(); ++n) {
        lam(n, t, f) = std::norm(y(n, t, f)) + eps;
      }
    }
  }
  return lam;
}

Eigen::MatrixXd coarsen_variances(const RTensor& lam_fine) {
  Eigen::MatrixXd coarse = Eigen::MatrixXd::Zero(lam_fine.rows(), lam_fine.frames());
  for (int f = 0; f < lam_fine.bins(); ++f) coarse += lam_fine.bin(f);
  coarse /= lam_fine.bins();
  return coarse;
}

SwitchWeights update_switches(const std::vector<CTensor>& z_states,
                              const SeparationMatrices& sep,
                              const RTensor& lam_fine, bool diagonal_only) {
  const int num_i = static_cast<int>(z_states.size());
  const int num_j = sep.num_states;
  const CTensor& z0 = z_states.front();
  const int m = z0.rows();

  SwitchWeights b(num_i, num_j, z0.frames(), z0.bins());

  std::vector<double> log_det(num_j);
  Eigen::VectorXcd yv(m);
  for (int f = 0; f < z0.bins(); ++f) {
    for (int j = 0; j < num_j; ++j) {
      double da = std::abs(sep.at(j, f).determinant());
      log_det[j] = da < kDetFloor ? -std::numeric_limits<double>::infinity()
                                  : std::log(da);
    }
    for (int t = 0; t < z0.frames(); ++t) {
      double log_lam_sum = 0.0;
      for (int n = 0; n < m; ++n) log_lam_sum += std::log(lam_fine(n, t, f));

      int best_i = 0, best_j = 0;
      double best_ll = -std::numeric_limits<double>::infinity();
      bool first = true;
      for (int i = 0; i < num_i; ++i) {
        for (int j = 0; j < num_j; ++j) {
          if (diagonal_only && i != j) continue;
          double ll;
          if (std::isinf(log_det[j])) {
            ll = -std::numeric_limits<double>::infinity();
          } else {
            yv.noalias() = sep.at(j, f).adjoint() * z_states[i].frame_vec(t, f);
            double power = 0.0;
            for (int n = 0; n < m; ++n) power += std::norm(yv(n)) / lam_fine(n, t, f);
            ll = -(power + log_lam_sum) + 2.0 * log_det[j];
          }
          if (first || ll > best_ll) {
            best_ll = ll;
            best_i = i;
            best_j = j;
            first = false;
          }
        }
      }
      b.set_one_hot(best_i, best_j, t, f);
    }
  }
  return b;
}

SwivaRoundStats swiva_round(ModelState& s, const SwivaRoundOptions& opt,
                            const StepObserver& observe) {
  SwivaRoundStats stats;
  const int m = s.channels();

  for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
    if (opt.coarse_fine) s.lam.coarse = coarsen_variances(s.lam.fine);

    WeightedCov cov = opt.coarse_fine
                          ? weighted_cov(s.z, s.beta, s.lam.coarse)
                          : weighted_cov(s.z, s.beta, s.lam.fine);

    if (observe) observe("w_pre", s);

    // All-state scatter used to prop up states starved of frames in a bin;
    // the covariances handed to IP are mass normalized so the unit-norm
    // constraint matches the T-weighted log-det term.
    WeightedCov eff = cov;
    for (int f = 0; f < cov.bins; ++f) {
      double mass_all = 0.0;
      for (int j = 0; j < cov.num_j; ++j) mass_all += cov.mass_at(j, f);
      for (int j = 0; j < cov.num_j; ++j) {
        double mass = cov.mass_at(j, f);
        double eff_mass = mass;
        const bool starved = mass < opt.blend_min_mass;
        if (starved) {
          ++stats.degenerate_states;
          for (int n = 0; n < cov.outputs; ++n) {
            Eigen::MatrixXcd all = Eigen::MatrixXcd::Zero(m, m);
            for (int jj = 0; jj < cov.num_j; ++jj) all += cov.at(jj, n, f);
            eff.at(j, n, f) += opt.blend_weight * all;
          }
          eff_mass += opt.blend_weight * mass_all;
        }
        if (eff_mass <= 0.0) continue;  // bin has no usable frames at all
        for (int n = 0; n < cov.outputs; ++n) {
          Eigen::MatrixXcd& sig = eff.at(j, n, f);
          sig /= eff_mass;
          sig.diagonal().array() += linalg::loading_epsilon(sig, opt.loading);
        }
      }
    }

    IpResult ip = ip_update(s.sep, eff);
    stats.aborted_bins += ip.aborted_bins;
    s.sep = std::move(ip.sep);

    if (observe) observe("w_post", s);

    CTensor y = compute_outputs(s.z, s.sep, s.beta);
    s.lam.fine = update_variances(y, s.lam.eps);
    if (observe) observe("lambda_post", s);

    s.beta = update_switches(s.z, s.sep, s.lam.fine, opt.diagonal_switch);
    if (observe) observe("beta_post", s);
  }
  return stats;
}

}  // namespace swbss::swiva
