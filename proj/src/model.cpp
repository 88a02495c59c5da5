// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/model.hpp"

#include <cmath>

#include "swbss/errors.hpp"

namespace swbss {

bool SwitchWeights::is_hard(double tol) const {
  for (int f = 0; f < bins_; ++f) {
    for (int t = 0; t < frames_; ++t) {
      int ones = 0;
      double sum = 0.0;
      for (int i = 0; i < num_i_; ++i) {
        for (int j = 0; j < num_j_; ++j) {
          double v = (*this)(i, j, t, f);
          sum += v;
          if (std::abs(v - 1.0) <= tol) {
            ++ones;
          } else if (std::abs(v) > tol) {
            return false;
          }
        }
      }
      if (ones != 1 || std::abs(sum - 1.0) > tol) return false;
    }
  }
  return true;
}

void SwitchWeights::validate_sums(double tol) const {
  for (int f = 0; f < bins_; ++f) {
    for (int t = 0; t < frames_; ++t) {
      if (std::abs(sum_at(t, f) - 1.0) > tol) {
        throw ConfigError("SwitchWeights: per-(t,f) weights do not sum to 1");
      }
    }
  }
}

Marginals marginals(const SwitchWeights& b) {
  b.validate_sums();
  Marginals m;
  m.gamma = RTensor(b.num_i(), b.frames(), b.bins());
  m.delta = RTensor(b.num_j(), b.frames(), b.bins());
  for (int f = 0; f < b.bins(); ++f) {
    for (int t = 0; t < b.frames(); ++t) {
      for (int i = 0; i < b.num_i(); ++i) {
        for (int j = 0; j < b.num_j(); ++j) {
          double v = b(i, j, t, f);
          m.gamma(i, t, f) += v;
          m.delta(j, t, f) += v;
        }
      }
    }
  }
  return m;
}

CTensor build_stacked_past(const CTensor& x, int delay, int span) {
  if (span <= delay || delay < 1) {
    throw ConfigError("build_stacked_past: need span > delay >= 1");
  }
  const int taps = span - delay;
  const int m = x.rows();
  CTensor out(m * taps, x.frames(), x.bins());
  for (int f = 0; f < x.bins(); ++f) {
    for (int t = 0; t < x.frames(); ++t) {
      for (int d = 0; d < taps; ++d) {
        const int src = t - delay - d;
        if (src < 0) continue;  // zero padded
        for (int r = 0; r < m; ++r) out(d * m + r, t, f) = x(r, src, f);
      }
    }
  }
  return out;
}

PredictionFilters PredictionFilters::zeros(int num_states, int bins,
                                           int stack_rows, int channels) {
  PredictionFilters p;
  p.num_states = num_states;
  p.bins = bins;
  p.g.assign(static_cast<size_t>(num_states) * bins,
             Eigen::MatrixXcd::Zero(stack_rows, channels));
  return p;
}

SeparationMatrices SeparationMatrices::identity(int num_states, int bins,
                                                int channels) {
  SeparationMatrices s;
  s.num_states = num_states;
  s.bins = bins;
  s.w.assign(static_cast<size_t>(num_states) * bins,
             Eigen::MatrixXcd::Identity(channels, channels));
  return s;
}

}  // namespace swbss
