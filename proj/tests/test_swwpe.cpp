// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "swbss/metrics.hpp"
#include "swbss/swwpe.hpp"

using namespace swbss;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

// Entry-level naive accumulation of the spatio-temporal covariances.
MatrixXcd naive_scatter(const CTensor& xbar, const SwitchWeights& b,
                        const RTensor& lam, int i, int j, int n, int f) {
  const int k = xbar.rows();
  MatrixXcd r = MatrixXcd::Zero(k, k);
  for (int t = 0; t < xbar.frames(); ++t) {
    const double w = b(i, j, t, f) / lam(n, t, f);
    for (int a = 0; a < k; ++a) {
      for (int c = 0; c < k; ++c) {
        r(a, c) += w * xbar(a, t, f) * std::conj(xbar(c, t, f));
      }
    }
  }
  return r;
}

MatrixXcd naive_cross(const CTensor& x, const CTensor& xbar, const SwitchWeights& b,
                      const RTensor& lam, int i, int j, int n, int f) {
  const int k = xbar.rows();
  const int m = x.rows();
  MatrixXcd p = MatrixXcd::Zero(k, m);
  for (int t = 0; t < x.frames(); ++t) {
    const double w = b(i, j, t, f) / lam(n, t, f);
    for (int a = 0; a < k; ++a) {
      for (int c = 0; c < m; ++c) {
        p(a, c) += w * xbar(a, t, f) * std::conj(x(c, t, f));
      }
    }
  }
  return p;
}

}  // namespace

TEST_CASE("accumulate_cov zero-weight state gives zero covariances") {
  Rng rng(40);
  CTensor x = oracles::random_ctensor(rng, 2, 6, 2);
  CTensor xbar = build_stacked_past(x, 1, 3);
  SwitchWeights b(2, 1, 6, 2);
  for (int f = 0; f < 2; ++f) {
    for (int t = 0; t < 6; ++t) b(0, 0, t, f) = 1.0;  // state 1 never selected
  }
  RTensor lam = oracles::random_positive_rtensor(rng, 2, 6, 2);
  auto cov = swwpe::accumulate_cov(x, xbar, b, lam);
  CHECK(cov.scatter_at(1, 0, 0, 0).norm() == 0.0);
  CHECK(cov.cross_at(1, 0, 1, 1).norm() == 0.0);
}

TEST_CASE("accumulate_cov single frame is the plain outer product") {
  Rng rng(41);
  CTensor x = oracles::random_ctensor(rng, 2, 1, 1);
  CTensor xbar = build_stacked_past(x, 1, 3);
  // With one frame the stacked past is all zeros; fill with fresh values to
  // make the outer product non-trivial.
  xbar = oracles::random_ctensor(rng, 4, 1, 1);
  SwitchWeights b(1, 1, 1, 1);
  b(0, 0, 0, 0) = 1.0;
  RTensor lam(2, 1, 1);
  lam(0, 0, 0) = lam(1, 0, 0) = 1.0;
  auto cov = swwpe::accumulate_cov(x, xbar, b, lam);
  auto xb = xbar.frame_vec(0, 0);
  auto xv = x.frame_vec(0, 0);
  CHECK((cov.scatter_at(0, 0, 0, 0) - xb * xb.adjoint()).norm() < 1e-14);
  CHECK((cov.cross_at(0, 0, 1, 0) - xb * xv.adjoint()).norm() < 1e-14);
}

TEST_CASE("accumulate_cov matches the naive loop oracle") {
  Rng rng(42);
  const int m = 2, frames = 8, bins = 3;
  CTensor x = oracles::random_ctensor(rng, m, frames, bins);
  CTensor xbar = build_stacked_past(x, 2, 5);
  SwitchWeights b = oracles::random_soft(rng, 2, 2, frames, bins);
  RTensor lam = oracles::random_positive_rtensor(rng, m, frames, bins);
  auto cov = swwpe::accumulate_cov(x, xbar, b, lam);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int n = 0; n < m; ++n) {
        for (int f = 0; f < bins; ++f) {
          CHECK((cov.scatter_at(i, j, n, f) - naive_scatter(xbar, b, lam, i, j, n, f))
                    .cwiseAbs()
                    .maxCoeff() < 1e-10);
          CHECK((cov.cross_at(i, j, n, f) - naive_cross(x, xbar, b, lam, i, j, n, f))
                    .cwiseAbs()
                    .maxCoeff() < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("assemble_normal_eq scalar case is |w|^2 R") {
  Rng rng(43);
  CTensor x = oracles::random_ctensor(rng, 1, 5, 1);
  CTensor xbar = build_stacked_past(x, 1, 4);
  SwitchWeights b(1, 1, 5, 1);
  for (int t = 0; t < 5; ++t) b(0, 0, t, 0) = 1.0;
  RTensor lam = oracles::random_positive_rtensor(rng, 1, 5, 1);
  auto cov = swwpe::accumulate_cov(x, xbar, b, lam);
  SeparationMatrices sep = SeparationMatrices::identity(1, 1, 1);
  sep.at(0, 0)(0, 0) = cd(0.6, -0.8);
  auto eq = swwpe::assemble_normal_eq(cov, sep);
  const double w2 = std::norm(sep.at(0, 0)(0, 0));
  CHECK((eq.matrix_at(0, 0) - w2 * cov.scatter_at(0, 0, 0, 0)).norm() < 1e-12);
}

TEST_CASE("assemble_normal_eq matches the direct-sum oracle") {
  Rng rng(44);
  const int m = 2, frames = 7, bins = 2, taps = 3;
  CTensor x = oracles::random_ctensor(rng, m, frames, bins);
  CTensor xbar = build_stacked_past(x, 1, 1 + taps);
  SwitchWeights b = oracles::random_one_hot(rng, 2, 2, frames, bins);
  RTensor lam = oracles::random_positive_rtensor(rng, m, frames, bins);
  auto cov = swwpe::accumulate_cov(x, xbar, b, lam);

  SeparationMatrices sep = SeparationMatrices::identity(2, bins, m);
  for (int j = 0; j < 2; ++j) {
    for (int f = 0; f < bins; ++f) sep.at(j, f) += 0.5 * oracles::random_cmatrix(rng, m, m);
  }
  auto eq = swwpe::assemble_normal_eq(cov, sep);

  const int stack = m * taps;
  for (int i = 0; i < 2; ++i) {
    for (int f = 0; f < bins; ++f) {
      MatrixXcd psi = MatrixXcd::Zero(m * stack, m * stack);
      MatrixXcd phi = MatrixXcd::Zero(stack, m);
      for (int j = 0; j < 2; ++j) {
        for (int n = 0; n < m; ++n) {
          VectorXcd w = sep.at(j, f).col(n);
          MatrixXcd r = naive_scatter(xbar, b, lam, i, j, n, f);
          MatrixXcd p = naive_cross(x, xbar, b, lam, i, j, n, f);
          for (int a = 0; a < m; ++a) {
            for (int c = 0; c < m; ++c) {
              const cd scale = std::conj(w(a) * std::conj(w(c)));
              for (int ra = 0; ra < stack; ++ra) {
                for (int rc = 0; rc < stack; ++rc) {
                  psi(a * stack + ra, c * stack + rc) += scale * r(ra, rc);
                }
              }
            }
          }
          for (int ra = 0; ra < stack; ++ra) {
            for (int a = 0; a < m; ++a) {
              cd acc = 0.0;
              for (int c = 0; c < m; ++c) acc += p(ra, c) * w(c) * std::conj(w(a));
              phi(ra, a) += acc;
            }
          }
        }
      }
      CHECK((eq.matrix_at(i, f) - psi).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((eq.rhs_at(i, f) - phi).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("assemble_normal_eq with unitary matrix gives block-diagonal structure") {
  Rng rng(45);
  const int m = 2, frames = 9, bins = 1;
  CTensor x = oracles::random_ctensor(rng, m, frames, bins);
  CTensor xbar = build_stacked_past(x, 1, 3);
  SwitchWeights b(1, 1, frames, bins);
  for (int t = 0; t < frames; ++t) b(0, 0, t, 0) = 1.0;
  // Same variance for every output so all per-source scatters coincide.
  RTensor lam(m, frames, bins);
  for (int t = 0; t < frames; ++t) {
    lam(0, t, 0) = lam(1, t, 0) = 1.3;
  }
  auto cov = swwpe::accumulate_cov(x, xbar, b, lam);

  // Unitary separation matrix: sum of column outer products is identity.
  MatrixXcd u = oracles::random_cmatrix(rng, m, m);
  Eigen::HouseholderQR<MatrixXcd> qr(u);
  SeparationMatrices sep = SeparationMatrices::identity(1, 1, m);
  sep.at(0, 0) = qr.householderQ();

  auto eq = swwpe::assemble_normal_eq(cov, sep);
  const MatrixXcd& r = cov.scatter_at(0, 0, 0, 0);
  const int stack = static_cast<int>(r.rows());
  for (int a = 0; a < m; ++a) {
    for (int c = 0; c < m; ++c) {
      MatrixXcd block = eq.matrix_at(0, 0).block(a * stack, c * stack, stack, stack);
      if (a == c) {
        CHECK((block - r).cwiseAbs().maxCoeff() < 1e-10);
      } else {
        CHECK(block.cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("update_prediction_filters returns zero for zero past") {
  Rng rng(46);
  CTensor x = oracles::random_ctensor(rng, 2, 6, 2);
  CTensor xbar(4, 6, 2);  // all zeros
  SwitchWeights b = oracles::random_one_hot(rng, 1, 1, 6, 2);
  RTensor lam = oracles::random_positive_rtensor(rng, 2, 6, 2);
  auto cov = swwpe::accumulate_cov(x, xbar, b, lam);
  auto eq = swwpe::assemble_normal_eq(cov, SeparationMatrices::identity(1, 2, 2));
  auto filters = swwpe::update_prediction_filters(eq);
  CHECK(filters.at(0, 0).norm() == 0.0);
  CHECK(filters.at(0, 1).norm() == 0.0);
}

TEST_CASE("update_prediction_filters matches a gradient-descent minimizer") {
  Rng rng(47);
  // Tiny instance: M = 2, one prediction tap, six frames, one bin.
  const int m = 2, frames = 6;
  CTensor x = oracles::random_ctensor(rng, m, frames, 1);
  CTensor xbar = build_stacked_past(x, 1, 2);
  SwitchWeights b = oracles::random_one_hot(rng, 1, 2, frames, 1);
  RTensor lam = oracles::random_positive_rtensor(rng, m, frames, 1);
  SeparationMatrices sep = SeparationMatrices::identity(2, 1, m);
  for (int j = 0; j < 2; ++j) sep.at(j, 0) += 0.3 * oracles::random_cmatrix(rng, m, m);

  auto cov = swwpe::accumulate_cov(x, xbar, b, lam);
  auto eq = swwpe::assemble_normal_eq(cov, sep);
  auto filters = swwpe::update_prediction_filters(eq);

  oracles::GObjectiveBin obj;
  obj.num_i = 1;
  obj.num_j = 2;
  obj.stack = m;
  obj.m = m;
  for (int t = 0; t < frames; ++t) {
    obj.x.push_back(x.frame_vec(t, 0));
    obj.xbar.push_back(xbar.frame_vec(t, 0));
    obj.beta.push_back({b(0, 0, t, 0), b(0, 1, t, 0)});
    obj.lam.push_back({lam(0, t, 0), lam(1, t, 0)});
  }
  obj.w = {sep.at(0, 0), sep.at(1, 0)};

  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(2 * m * m);
  Eigen::VectorXd popt = oracles::gradient_descent_quadratic(
      [&](const Eigen::VectorXd& p) { return obj(p, 0); }, p0);
  MatrixXcd g_oracle = obj.unpack(popt);
  CHECK((g_oracle - filters.at(0, 0)).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("per-state solutions equal single-state solutions on their halves") {
  Rng rng(48);
  const int m = 2, frames = 10, bins = 2;
  CTensor x = oracles::random_ctensor(rng, m, frames, bins);
  CTensor xbar = build_stacked_past(x, 1, 3);
  RTensor lam = oracles::random_positive_rtensor(rng, m, frames, bins);
  SeparationMatrices sep = SeparationMatrices::identity(1, bins, m);
  for (int f = 0; f < bins; ++f) sep.at(0, f) += 0.3 * oracles::random_cmatrix(rng, m, m);

  SwitchWeights split(2, 1, frames, bins);
  for (int f = 0; f < bins; ++f) {
    for (int t = 0; t < frames; ++t) split(t < frames / 2 ? 0 : 1, 0, t, f) = 1.0;
  }
  auto cov = swwpe::accumulate_cov(x, xbar, split, lam);
  auto eq = swwpe::assemble_normal_eq(cov, sep);
  auto filters = swwpe::update_prediction_filters(eq);

  for (int half = 0; half < 2; ++half) {
    const int lo = half == 0 ? 0 : frames / 2;
    const int hi = half == 0 ? frames / 2 : frames;
    CTensor xs(m, hi - lo, bins), xbs(xbar.rows(), hi - lo, bins);
    RTensor ls(m, hi - lo, bins);
    SwitchWeights bs(1, 1, hi - lo, bins);
    for (int f = 0; f < bins; ++f) {
      for (int t = lo; t < hi; ++t) {
        for (int r = 0; r < m; ++r) xs(r, t - lo, f) = x(r, t, f);
        for (int r = 0; r < xbar.rows(); ++r) xbs(r, t - lo, f) = xbar(r, t, f);
        for (int r = 0; r < m; ++r) ls(r, t - lo, f) = lam(r, t, f);
        bs(0, 0, t - lo, f) = 1.0;
      }
    }
    auto cov1 = swwpe::accumulate_cov(xs, xbs, bs, ls);
    auto eq1 = swwpe::assemble_normal_eq(cov1, sep);
    auto f1 = swwpe::update_prediction_filters(eq1);
    for (int f = 0; f < bins; ++f) {
      CHECK((f1.at(0, f) - filters.at(half, f)).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("apply_mclp with zero filters passes the input through") {
  Rng rng(49);
  CTensor x = oracles::random_ctensor(rng, 2, 5, 2);
  CTensor xbar = build_stacked_past(x, 1, 3);
  auto filters = PredictionFilters::zeros(1, 2, 4, 2);
  auto z = swwpe::apply_mclp(x, xbar, filters);
  for (int f = 0; f < 2; ++f) {
    for (int t = 0; t < 5; ++t) {
      CHECK((z[0].frame_vec(t, f) - x.frame_vec(t, f)).norm() == 0.0);
    }
  }
}

TEST_CASE("apply_mclp reconstruction identity") {
  Rng rng(50);
  CTensor x = oracles::random_ctensor(rng, 2, 6, 2);
  CTensor xbar = build_stacked_past(x, 1, 4);
  PredictionFilters filters = PredictionFilters::zeros(1, 2, 6, 2);
  for (int f = 0; f < 2; ++f) filters.at(0, f) = oracles::random_cmatrix(rng, 6, 2);
  auto z = swwpe::apply_mclp(x, xbar, filters);
  for (int f = 0; f < 2; ++f) {
    for (int t = 0; t < 6; ++t) {
      VectorXcd back = z[0].frame_vec(t, f) +
                       filters.at(0, f).adjoint() * xbar.frame_vec(t, f);
      CHECK((back - x.frame_vec(t, f)).norm() < 1e-13);
    }
  }
}

TEST_CASE("a least-squares tap cancels a single synthetic reflection") {
  Rng rng(51);
  const int frames = 1024;
  const double a = 0.08;
  CTensor s = oracles::random_ctensor(rng, 1, frames, 1);
  CTensor x(1, frames, 1);
  for (int t = 0; t < frames; ++t) {
    x(0, t, 0) = s(0, t, 0) + (t >= 2 ? a * s(0, t - 2, 0) : cd(0.0, 0.0));
  }
  CTensor xbar = build_stacked_past(x, 2, 3);

  // Closed-form least-squares tap for the reflection component, computed
  // directly in the test from the ground truth.
  cd num = 0.0;
  double den = 0.0;
  for (int t = 0; t < frames; ++t) {
    num += xbar(0, t, 0) * std::conj(x(0, t, 0) - s(0, t, 0));
    den += std::norm(xbar(0, t, 0));
  }
  PredictionFilters filters = PredictionFilters::zeros(1, 1, 1, 1);
  filters.at(0, 0)(0, 0) = num / den;

  auto z = swwpe::apply_mclp(x, xbar, filters);
  double err_before = 0.0, err_after = 0.0;
  for (int t = 0; t < frames; ++t) {
    err_before += std::norm(x(0, t, 0) - s(0, t, 0));
    err_after += std::norm(z[0](0, t, 0) - s(0, t, 0));
  }
  CHECK(10.0 * std::log10(err_before / err_after) > 20.0);
}

TEST_CASE("plain_swwpe_step with one state is a conventional WPE iteration") {
  Rng rng(52);
  const int m = 2, frames = 24, bins = 2;
  CTensor x = oracles::random_ctensor(rng, m, frames, bins);
  CTensor xbar = build_stacked_past(x, 2, 4);
  RTensor gamma(1, frames, bins);
  for (int f = 0; f < bins; ++f) {
    for (int t = 0; t < frames; ++t) gamma(0, t, f) = 1.0;
  }
  const double eps = 1e-8;
  auto res = swwpe::plain_swwpe_step(x, xbar, gamma, eps);

  // Everything stays in the single state.
  for (int f = 0; f < bins; ++f) {
    for (int t = 0; t < frames; ++t) CHECK(res.gamma(0, t, f) == 1.0);
  }

  // Direct normal equations with the shared scalar variance.
  for (int f = 0; f < bins; ++f) {
    MatrixXcd r = MatrixXcd::Zero(xbar.rows(), xbar.rows());
    MatrixXcd p = MatrixXcd::Zero(xbar.rows(), m);
    for (int t = 0; t < frames; ++t) {
      const double var = x.frame_vec(t, f).squaredNorm() / m + eps;
      r += xbar.frame_vec(t, f) * xbar.frame_vec(t, f).adjoint() / var;
      p += xbar.frame_vec(t, f) * x.frame_vec(t, f).adjoint() / var;
    }
    MatrixXcd g = r.ldlt().solve(p);
    CHECK((g - res.filters.at(0, f)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("plain_swwpe_step yields a hard one-hot switch") {
  Rng rng(53);
  const int m = 2, frames = 30, bins = 3, num_i = 2;
  CTensor x = oracles::random_ctensor(rng, m, frames, bins);
  CTensor xbar = build_stacked_past(x, 2, 5);
  RTensor gamma(num_i, frames, bins);
  for (int f = 0; f < bins; ++f) {
    for (int t = 0; t < frames; ++t) {
      double a = rng.uniform(1.0 - 1e-3, 1.0 + 1e-3);
      double b = rng.uniform(1.0 - 1e-3, 1.0 + 1e-3);
      gamma(0, t, f) = a / (a + b);
      gamma(1, t, f) = b / (a + b);
    }
  }
  auto res = swwpe::plain_swwpe_step(x, xbar, gamma, 1e-6);
  for (int f = 0; f < bins; ++f) {
    for (int t = 0; t < frames; ++t) {
      const double g0 = res.gamma(0, t, f), g1 = res.gamma(1, t, f);
      CHECK(((g0 == 1.0 && g1 == 0.0) || (g0 == 0.0 && g1 == 1.0)));
      // Hard assignment picks the lower dereverberated power, ties to the
      // smaller index.
      const double p0 = res.z[0].frame_vec(t, f).squaredNorm();
      const double p1 = res.z[1].frame_vec(t, f).squaredNorm();
      if (p0 <= p1) {
        CHECK(g0 == 1.0);
      } else {
        CHECK(g1 == 1.0);
      }
    }
  }
}

TEST_CASE("prediction-filter update does not decrease the fine likelihood") {
  Rng rng(54);
  for (int trial = 0; trial < 5; ++trial) {
    const int m = 2, frames = 20, bins = 3;
    ModelState s;
    s.x = oracles::random_ctensor(rng, m, frames, bins);
    s.stacked_past = build_stacked_past(s.x, 2, 4);
    s.beta = oracles::random_one_hot(rng, 2, 2, frames, bins);
    s.sep = SeparationMatrices::identity(2, bins, m);
    for (int j = 0; j < 2; ++j) {
      for (int f = 0; f < bins; ++f) s.sep.at(j, f) += 0.3 * oracles::random_cmatrix(rng, m, m);
    }
    s.lam.fine = oracles::random_positive_rtensor(rng, m, frames, bins);
    s.filters = PredictionFilters::zeros(2, bins, s.stacked_past.rows(), m);
    for (int i = 0; i < 2; ++i) {
      for (int f = 0; f < bins; ++f) {
        s.filters.at(i, f) = 0.2 * oracles::random_cmatrix(rng, s.stacked_past.rows(), m);
      }
    }
    s.z = swwpe::apply_mclp(s.x, s.stacked_past, s.filters);
    s.num_sources = m;

    const double before = metrics::log_likelihood(s);
    auto cov = swwpe::accumulate_cov(s.x, s.stacked_past, s.beta, s.lam.fine);
    auto eq = swwpe::assemble_normal_eq(cov, s.sep);
    s.filters = swwpe::update_prediction_filters(eq);
    s.z = swwpe::apply_mclp(s.x, s.stacked_past, s.filters);
    const double after = metrics::log_likelihood(s);
    CHECK(after >= before - 1e-8 * std::abs(before));
  }
}

TEST_CASE("prediction filters are invariant to joint signal/variance scaling") {
  Rng rng(55);
  const int m = 2, frames = 12, bins = 2;
  CTensor x = oracles::random_ctensor(rng, m, frames, bins);
  CTensor xbar = build_stacked_past(x, 1, 3);
  SwitchWeights b = oracles::random_one_hot(rng, 1, 1, frames, bins);
  RTensor lam = oracles::random_positive_rtensor(rng, m, frames, bins);
  SeparationMatrices sep = SeparationMatrices::identity(1, bins, m);

  auto g0 = swwpe::update_prediction_filters(
      swwpe::assemble_normal_eq(swwpe::accumulate_cov(x, xbar, b, lam), sep));

  const double c = 3.0;
  CTensor xs = x, xbs = xbar;
  RTensor ls = lam;
  for (int f = 0; f < bins; ++f) {
    for (int t = 0; t < frames; ++t) {
      for (int r = 0; r < m; ++r) {
        xs(r, t, f) *= c;
        ls(r, t, f) *= c * c;
      }
      for (int r = 0; r < xbar.rows(); ++r) xbs(r, t, f) *= c;
    }
  }
  auto g1 = swwpe::update_prediction_filters(
      swwpe::assemble_normal_eq(swwpe::accumulate_cov(xs, xbs, b, ls), sep));
  for (int f = 0; f < bins; ++f) {
    CHECK((g0.at(0, f) - g1.at(0, f)).cwiseAbs().maxCoeff() < 1e-10);
  }
}
