// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/swwpe.hpp"

#include <cmath>

#include "swbss/errors.hpp"

namespace swbss::swwpe {

namespace {
constexpr double kWeightCutoff = 1e-300;
}

PastCovariances accumulate_cov(const CTensor& x, const CTensor& xbar,
                               const SwitchWeights& b, const RTensor& lam_fine) {
  if (x.frames() != xbar.frames() || x.bins() != xbar.bins()) {
    throw ConfigError("accumulate_cov: x and xbar shapes inconsistent");
  }
  if (lam_fine.rows() != x.rows() || lam_fine.frames() != x.frames() ||
      lam_fine.bins() != x.bins()) {
    throw ConfigError("accumulate_cov: lambda shape mismatch");
  }

  const int stack = xbar.rows();
  const int m = x.rows();
  PastCovariances cov;
  cov.num_i = b.num_i();
  cov.num_j = b.num_j();
  cov.outputs = m;
  cov.bins = x.bins();
  cov.past_scatter.assign(
      static_cast<size_t>(cov.num_i) * cov.num_j * m * cov.bins,
      Eigen::MatrixXcd::Zero(stack, stack));
  cov.past_cross.assign(
      static_cast<size_t>(cov.num_i) * cov.num_j * m * cov.bins,
      Eigen::MatrixXcd::Zero(stack, m));

  for (int f = 0; f < x.bins(); ++f) {
    for (int t = 0; t < x.frames(); ++t) {
      auto xb = xbar.frame_vec(t, f);
      auto xv = x.frame_vec(t, f);
      for (int i = 0; i < cov.num_i; ++i) {
        for (int j = 0; j < cov.num_j; ++j) {
          const double w = b(i, j, t, f);
          if (w <= kWeightCutoff) continue;
          const Eigen::MatrixXcd outer_s = xb * xb.adjoint();
          const Eigen::MatrixXcd outer_c = xb * xv.adjoint();
          for (int n = 0; n < m; ++n) {
            const double scale = w / lam_fine(n, t, f);
            cov.scatter_at(i, j, n, f).noalias() += scale * outer_s;
            cov.cross_at(i, j, n, f).noalias() += scale * outer_c;
          }
        }
      }
    }
  }
  return cov;
}

NormalEquations assemble_normal_eq(const PastCovariances& cov,
                                   const SeparationMatrices& sep) {
  if (sep.num_states != cov.num_j) {
    throw ConfigError("assemble_normal_eq: separation state count mismatch");
  }
  const int m = cov.outputs;
  const int stack = cov.past_scatter.empty()
                        ? 0
                        : static_cast<int>(cov.past_scatter.front().rows());

  NormalEquations eq;
  eq.num_i = cov.num_i;
  eq.bins = cov.bins;
  eq.normal_matrix.assign(static_cast<size_t>(cov.num_i) * cov.bins,
                          Eigen::MatrixXcd::Zero(m * stack, m * stack));
  eq.normal_rhs.assign(static_cast<size_t>(cov.num_i) * cov.bins,
                       Eigen::MatrixXcd::Zero(stack, m));

  for (int f = 0; f < cov.bins; ++f) {
    for (int i = 0; i < cov.num_i; ++i) {
      Eigen::MatrixXcd& psi = eq.matrix_at(i, f);
      Eigen::MatrixXcd& phi = eq.rhs_at(i, f);
      for (int j = 0; j < cov.num_j; ++j) {
        const Eigen::MatrixXcd& w = sep.at(j, f);
        for (int n = 0; n < m; ++n) {
          const Eigen::VectorXcd wn = w.col(n);
          const Eigen::MatrixXcd outer = wn * wn.adjoint();
          const Eigen::MatrixXcd outer_conj = outer.conjugate();
          const Eigen::MatrixXcd& r = cov.scatter_at(i, j, n, f);
          for (int a = 0; a < m; ++a) {
            for (int c = 0; c < m; ++c) {
              psi.block(a * stack, c * stack, stack, stack).noalias() +=
                  outer_conj(a, c) * r;
            }
          }
          phi.noalias() += cov.cross_at(i, j, n, f) * outer;
        }
      }
    }
  }
  return eq;
}

PredictionFilters update_prediction_filters(const NormalEquations& eq,
                                            const linalg::LoadingPolicy& p) {
  PredictionFilters out;
  out.num_states = eq.num_i;
  out.bins = eq.bins;
  out.g.resize(static_cast<size_t>(eq.num_i) * eq.bins);

  for (int f = 0; f < eq.bins; ++f) {
    for (int i = 0; i < eq.num_i; ++i) {
      const Eigen::MatrixXcd& phi = eq.rhs_at(i, f);
      const int stack = static_cast<int>(phi.rows());
      const int m = static_cast<int>(phi.cols());
      Eigen::VectorXcd g =
          linalg::hermitian_solve(eq.matrix_at(i, f), linalg::vec(phi), p);
      out.at(i, f) = linalg::unvec(g, stack, m);
    }
  }
  return out;
}

CTensor apply_mclp_state(const CTensor& x, const CTensor& xbar,
                         const PredictionFilters& filters, int state) {
  CTensor z(x.rows(), x.frames(), x.bins());
  for (int f = 0; f < x.bins(); ++f) {
    z.bin(f) = x.bin(f);
    z.bin(f).noalias() -= filters.at(state, f).adjoint() * xbar.bin(f);
  }
  return z;
}

std::vector<CTensor> apply_mclp(const CTensor& x, const CTensor& xbar,
                                const PredictionFilters& filters) {
  std::vector<CTensor> z;
  z.reserve(filters.num_states);
  for (int i = 0; i < filters.num_states; ++i) {
    z.push_back(apply_mclp_state(x, xbar, filters, i));
  }
  return z;
}

PlainSwwpeResult plain_swwpe_step(const CTensor& x, const CTensor& xbar,
                                  const RTensor& gamma, double eps,
                                  const linalg::LoadingPolicy& p) {
  const int num_i = gamma.rows();
  const int m = x.rows();
  const int stack = xbar.rows();

  PlainSwwpeResult res;
  res.filters = PredictionFilters::zeros(num_i, x.bins(), stack, m);

  for (int f = 0; f < x.bins(); ++f) {
    std::vector<Eigen::MatrixXcd> r(num_i, Eigen::MatrixXcd::Zero(stack, stack));
    std::vector<Eigen::MatrixXcd> q(num_i, Eigen::MatrixXcd::Zero(stack, m));
    for (int t = 0; t < x.frames(); ++t) {
      auto xv = x.frame_vec(t, f);
      auto xb = xbar.frame_vec(t, f);
      const double shared_var = xv.squaredNorm() / m + eps;
      const Eigen::MatrixXcd outer_s = xb * xb.adjoint() / shared_var;
      const Eigen::MatrixXcd outer_c = xb * xv.adjoint() / shared_var;
      for (int i = 0; i < num_i; ++i) {
        const double w = gamma(i, t, f);
        if (w <= kWeightCutoff) continue;
        r[i].noalias() += w * outer_s;
        q[i].noalias() += w * outer_c;
      }
    }
    for (int i = 0; i < num_i; ++i) {
      res.filters.at(i, f) = linalg::hermitian_solve(r[i], q[i], p);
    }
  }

  res.z = apply_mclp(x, xbar, res.filters);

  // Hard re-assignment by minimum dereverberated power; ties go to the
  // smallest state index.
  res.gamma = RTensor(num_i, x.frames(), x.bins());
  for (int f = 0; f < x.bins(); ++f) {
    for (int t = 0; t < x.frames(); ++t) {
      int best = 0;
      double best_pow = res.z[0].frame_vec(t, f).squaredNorm();
      for (int i = 1; i < num_i; ++i) {
        double pow_i = res.z[i].frame_vec(t, f).squaredNorm();
        if (pow_i < best_pow) {
          best_pow = pow_i;
          best = i;
        }
      }
      res.gamma(best, t, f) = 1.0;
    }
  }
  return res;
}

}  // namespace swbss::swwpe
