// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

namespace swbss {

using cd = std::complex<double>;

// Dense 3-index complex tensor indexed (row, frame, bin). Rows hold
// channels, sources, or stacked taps depending on use. Storage is one
// column-major rows x frames matrix per bin, so the per-frame vector at
// (t, f) and the per-bin matrix at f map directly onto Eigen views.
class CTensor {
 public:
  CTensor() = default;
  CTensor(int rows, int frames, int bins)
      : rows_(rows),
        frames_(frames),
        bins_(bins),
        data_(static_cast<size_t>(rows) * frames * bins, cd(0.0, 0.0)) {}

  int rows() const { return rows_; }
  int frames() const { return frames_; }
  int bins() const { return bins_; }
  bool empty() const { return data_.empty(); }

  cd& operator()(int r, int t, int f) { return data_[idx(r, t, f)]; }
  const cd& operator()(int r, int t, int f) const { return data_[idx(r, t, f)]; }

  Eigen::Map<Eigen::MatrixXcd> bin(int f) {
    return {data_.data() + idx(0, 0, f), rows_, frames_};
  }
  Eigen::Map<const Eigen::MatrixXcd> bin(int f) const {
    return {data_.data() + idx(0, 0, f), rows_, frames_};
  }
  Eigen::Map<Eigen::VectorXcd> frame_vec(int t, int f) {
    return {data_.data() + idx(0, t, f), rows_};
  }
  Eigen::Map<const Eigen::VectorXcd> frame_vec(int t, int f) const {
    return {data_.data() + idx(0, t, f), rows_};
  }

  bool all_finite() const {
    for (const cd& v : data_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
  }

  bool same_shape(const CTensor& o) const {
    return rows_ == o.rows_ && frames_ == o.frames_ && bins_ == o.bins_;
  }

 private:
  size_t idx(int r, int t, int f) const {
    return (static_cast<size_t>(f) * frames_ + t) * rows_ + r;
  }

  int rows_ = 0, frames_ = 0, bins_ = 0;
  std::vector<cd> data_;
};

// Real counterpart of CTensor with the same layout; used for variances,
// switching-weight marginals, and TF masks.
class RTensor {
 public:
  RTensor() = default;
  RTensor(int rows, int frames, int bins)
      : rows_(rows),
        frames_(frames),
        bins_(bins),
        data_(static_cast<size_t>(rows) * frames * bins, 0.0) {}

  int rows() const { return rows_; }
  int frames() const { return frames_; }
  int bins() const { return bins_; }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int t, int f) { return data_[idx(r, t, f)]; }
  const double& operator()(int r, int t, int f) const { return data_[idx(r, t, f)]; }

  Eigen::Map<Eigen::MatrixXd> bin(int f) {
    return {data_.data() + idx(0, 0, f), rows_, frames_};
  }
  Eigen::Map<const Eigen::MatrixXd> bin(int f) const {
    return {data_.data() + idx(0, 0, f), rows_, frames_};
  }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool same_shape(const RTensor& o) const {
    return rows_ == o.rows_ && frames_ == o.frames_ && bins_ == o.bins_;
  }

 private:
  size_t idx(int r, int t, int f) const {
    return (static_cast<size_t>(f) * frames_ + t) * rows_ + r;
  }

  int rows_ = 0, frames_ = 0, bins_ = 0;
  std::vector<double> data_;
};

// Multichannel time-domain signal, one row per channel.
struct Waveform {
  Eigen::MatrixXd samples;  // channels x num_samples
  double sample_rate = 16000.0;

  int channels() const { return static_cast<int>(samples.rows()); }
  Eigen::Index num_samples() const { return samples.cols(); }
};

}  // namespace swbss
