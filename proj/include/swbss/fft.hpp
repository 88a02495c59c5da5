// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <vector>

namespace swbss {

// Fixed-size real <-> half-complex transform pair backed by FFTW. One
// instance owns its plans and scratch buffers; do not share an instance
// across threads, create one per thread instead.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  // X[k] = sum_n x[n] e^{-2 pi i k n / N}, k = 0..N/2
  void forward(const double* in, std::complex<double>* out);
  // Inverse including the 1/N factor, so inverse(forward(x)) == x.
  void inverse(const std::complex<double>* in, double* out);

 private:
  int n_;
  void* fwd_ = nullptr;  // fftw_plan
  void* inv_ = nullptr;
  double* real_buf_ = nullptr;
  void* cplx_buf_ = nullptr;  // fftw_complex*
};

// Linear convolution of two real sequences via zero-padded FFT.
std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b);

}  // namespace swbss
