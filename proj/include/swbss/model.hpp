// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <utility>
#include <vector>

#include "swbss/tensor.hpp"

namespace swbss {

// Unified switching weights over the I x J state grid with a per-(t,f)
// sum-to-one constraint. Weights are binary after every switch update;
// soft values appear transiently during initialization.
class SwitchWeights {
 public:
  SwitchWeights() = default;
  SwitchWeights(int num_i, int num_j, int frames, int bins)
      : num_i_(num_i),
        num_j_(num_j),
        frames_(frames),
        bins_(bins),
        data_(static_cast<size_t>(num_i) * num_j * frames * bins, 0.0) {}

  int num_i() const { return num_i_; }
  int num_j() const { return num_j_; }
  int frames() const { return frames_; }
  int bins() const { return bins_; }
  bool empty() const { return data_.empty(); }

  double& operator()(int i, int j, int t, int f) { return data_[idx(i, j, t, f)]; }
  const double& operator()(int i, int j, int t, int f) const {
    return data_[idx(i, j, t, f)];
  }

  double sum_at(int t, int f) const {
    double s = 0.0;
    const double* p = &data_[idx(0, 0, t, f)];
    for (int k = 0; k < num_i_ * num_j_; ++k) s += p[k];
    return s;
  }

  void set_one_hot(int i, int j, int t, int f) {
    double* p = &data_[idx(0, 0, t, f)];
    for (int k = 0; k < num_i_ * num_j_; ++k) p[k] = 0.0;
    p[i * num_j_ + j] = 1.0;
  }

  // Largest-weight state at (t, f); ties resolved toward the lowest
  // (i, then j) index.
  std::pair<int, int> selected_state(int t, int f) const {
    const double* p = &data_[idx(0, 0, t, f)];
    int best = 0;
    for (int k = 1; k < num_i_ * num_j_; ++k) {
      if (p[k] > p[best]) best = k;
    }
    return {best / num_j_, best % num_j_};
  }

  bool is_hard(double tol = 1e-12) const;
  void validate_sums(double tol = 1e-6) const;  // throws ConfigError

 private:
  size_t idx(int i, int j, int t, int f) const {
    return (static_cast<size_t>(f) * frames_ + t) * (num_i_ * num_j_) +
           static_cast<size_t>(i) * num_j_ + j;
  }

  int num_i_ = 0, num_j_ = 0, frames_ = 0, bins_ = 0;
  std::vector<double> data_;
};

// Per-switch marginal weights: gamma over MCLP states (I, T, F) and delta
// over separation states (J, T, F).
struct Marginals {
  RTensor gamma;
  RTensor delta;
};

Marginals marginals(const SwitchWeights& b);

// Stacked past observations [x_{t-D}; ...; x_{t-L+1}] per (t, f), shape
// M(L-D) x T x F. Frames without enough history are zero padded.
CTensor build_stacked_past(const CTensor& x, int delay, int span);

// Per-state MCLP prediction matrices, each M(L-D) x M.
struct PredictionFilters {
  int num_states = 0;
  int bins = 0;
  std::vector<Eigen::MatrixXcd> g;

  static PredictionFilters zeros(int num_states, int bins, int stack_rows,
                                 int channels);
  Eigen::MatrixXcd& at(int i, int f) { return g[static_cast<size_t>(i) * bins + f]; }
  const Eigen::MatrixXcd& at(int i, int f) const {
    return g[static_cast<size_t>(i) * bins + f];
  }
  bool empty() const { return g.empty(); }
};

// Per-state separation matrices, each M x M; column n separates output n.
struct SeparationMatrices {
  int num_states = 0;
  int bins = 0;
  std::vector<Eigen::MatrixXcd> w;

  static SeparationMatrices identity(int num_states, int bins, int channels);
  Eigen::MatrixXcd& at(int j, int f) { return w[static_cast<size_t>(j) * bins + f]; }
  const Eigen::MatrixXcd& at(int j, int f) const {
    return w[static_cast<size_t>(j) * bins + f];
  }
  bool empty() const { return w.empty(); }
};

// Time-varying Gaussian source variances: fine lambda(n,t,f) and its
// frequency mean lambda(n,t), plus the positive floor used when updating.
struct SourceVariances {
  RTensor fine;             // outputs x T x F
  Eigen::MatrixXd coarse;   // outputs x T
  double eps = 0.0;
};

// Full state of one enhancement problem instance. stacked_past, z and
// filters stay empty when the MCLP path is disabled.
struct ModelState {
  CTensor x;                  // observed, M x T x F
  CTensor stacked_past;       // M(L-D) x T x F
  std::vector<CTensor> z;     // dereverberated signal per MCLP state i
  SwitchWeights beta;
  PredictionFilters filters;
  SeparationMatrices sep;
  SourceVariances lam;
  int num_sources = 0;        // N; outputs N+1..M act as noise estimates
  int ref_channel = 0;

  int channels() const { return x.rows(); }
  int frames() const { return x.frames(); }
  int bins() const { return x.bins(); }
};

}  // namespace swbss
