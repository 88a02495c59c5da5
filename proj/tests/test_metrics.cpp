// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "swbss/errors.hpp"
#include "swbss/metrics.hpp"

using namespace swbss;

namespace {

ModelState trivial_state(int m, int frames, int bins) {
  ModelState s;
  s.x = CTensor(m, frames, bins);
  s.z = {s.x};
  s.beta = SwitchWeights(1, 1, frames, bins);
  for (int f = 0; f < bins; ++f) {
    for (int t = 0; t < frames; ++t) s.beta(0, 0, t, f) = 1.0;
  }
  s.sep = SeparationMatrices::identity(1, bins, m);
  s.lam.fine = RTensor(m, frames, bins);
  for (int f = 0; f < bins; ++f) {
    for (int t = 0; t < frames; ++t) {
      for (int n = 0; n < m; ++n) s.lam.fine(n, t, f) = 1.0;
    }
  }
  s.lam.coarse = Eigen::MatrixXd::Ones(m, frames);
  s.num_sources = m;
  return s;
}

}  // namespace

TEST_CASE("log likelihood vanishes for zero outputs, unit variance, identity") {
  ModelState s = trivial_state(2, 3, 4);
  CHECK(metrics::log_likelihood(s) == 0.0);
  CHECK(metrics::log_likelihood_coarse(s) == 0.0);
}

TEST_CASE("single unit-power term contributes -1") {
  ModelState s = trivial_state(1, 1, 1);
  s.z[0](0, 0, 0) = cd(1.0, 0.0);
  CHECK(metrics::log_likelihood(s) == doctest::Approx(-1.0));
}

TEST_CASE("log likelihood matches the naive oracle on random states") {
  Rng rng(30);
  for (int trial = 0; trial < 4; ++trial) {
    ModelState s = oracles::random_state(rng, 2 + trial % 2, 6, 5, 2, 2,
                                         trial % 2 == 0);
    const double fine = metrics::log_likelihood(s);
    const double coarse = metrics::log_likelihood_coarse(s);
    CHECK(fine == doctest::Approx(oracles::naive_log_likelihood(s, false)).epsilon(1e-10));
    CHECK(coarse == doctest::Approx(oracles::naive_log_likelihood(s, true)).epsilon(1e-10));
  }
}

TEST_CASE("singular separation matrix yields -inf sentinel") {
  ModelState s = trivial_state(2, 2, 2);
  s.sep.at(0, 1).setZero();
  CHECK(std::isinf(metrics::log_likelihood(s)));
  CHECK(metrics::log_likelihood(s) < 0.0);
}

namespace {

Waveform speechish(Rng& rng, Eigen::Index len) {
  Waveform w;
  w.sample_rate = 16000.0;
  w.samples = Eigen::MatrixXd(1, len);
  double lp = 0.0;
  for (Eigen::Index s = 0; s < len; ++s) {
    lp = 0.95 * lp + 0.3 * rng.normal();
    const double gate = std::sin(2.0 * M_PI * 3.0 * s / 16000.0) > -0.3 ? 1.0 : 0.0;
    w.samples(0, s) = lp * gate;
  }
  return w;
}

}  // namespace

TEST_CASE("fwssnr of a signal against itself hits the clamp ceiling") {
  Rng rng(31);
  Waveform w = speechish(rng, 16000);
  CHECK(metrics::fwssnr_db(w, w) == doctest::Approx(35.0));
}

TEST_CASE("fwssnr decreases monotonically with noise level") {
  Rng rng(32);
  Waveform ref = speechish(rng, 16000);
  Waveform noise;
  noise.sample_rate = 16000.0;
  noise.samples = Eigen::MatrixXd(1, 16000);
  for (int s = 0; s < 16000; ++s) noise.samples(0, s) = rng.normal();
  noise.samples *= ref.samples.norm() / noise.samples.norm();

  std::vector<double> scores;
  for (double gain : {0.0, 0.05, 0.2, 0.5, 1.0, 2.0}) {
    Waveform est;
    est.sample_rate = 16000.0;
    est.samples = ref.samples + gain * noise.samples;
    scores.push_back(metrics::fwssnr_db(est, ref));
  }
  CHECK(scores.front() == doctest::Approx(35.0));
  for (size_t k = 1; k < scores.size(); ++k) CHECK(scores[k] < scores[k - 1] + 1e-9);
  CHECK(scores[4] > -10.0);
  CHECK(scores[4] < 35.0);
}

TEST_CASE("fwssnr treats a sign flip as noise-floor output") {
  Rng rng(33);
  Waveform ref = speechish(rng, 16000);
  Waveform flipped;
  flipped.sample_rate = 16000.0;
  flipped.samples = -ref.samples;
  CHECK(metrics::fwssnr_db(flipped, ref) < 0.0);
}

TEST_CASE("fwssnr rejects silent references") {
  Waveform silent;
  silent.sample_rate = 16000.0;
  silent.samples = Eigen::MatrixXd::Zero(1, 8000);
  CHECK_THROWS_AS(metrics::fwssnr_db(silent, silent), ConfigError);
}

TEST_CASE("sir of an exact reference is capped") {
  Rng rng(34);
  Eigen::VectorXd r1(4000), r2(4000);
  for (int s = 0; s < 4000; ++s) {
    r1(s) = rng.normal();
    r2(s) = rng.normal();
  }
  std::vector<Eigen::VectorXd> refs{r1, r2};
  CHECK(metrics::sir_db(r1, refs, 0) == doctest::Approx(60.0));
}

TEST_CASE("sir improvement of the mixture itself is zero") {
  Rng rng(35);
  Eigen::VectorXd r1(4000), r2(4000);
  for (int s = 0; s < 4000; ++s) {
    r1(s) = rng.normal();
    r2(s) = rng.normal();
  }
  std::vector<Eigen::VectorXd> refs{r1, r2};
  Eigen::VectorXd mix = r1 + r2;
  CHECK(metrics::sir_improvement_db(mix, refs, 0, mix) == doctest::Approx(0.0));
}

TEST_CASE("sir of a 0.9/0.1 blend is about 19 dB") {
  Rng rng(36);
  Eigen::VectorXd r1(20000), r2(20000);
  for (int s = 0; s < 20000; ++s) {
    r1(s) = rng.normal();
    r2(s) = rng.normal();
  }
  r1.normalize();
  r2.normalize();
  std::vector<Eigen::VectorXd> refs{r1, r2};
  Eigen::VectorXd est = 0.9 * r1 + 0.1 * r2;
  // Projection oracle: 20 log10(0.9 / 0.1) for orthonormal references.
  CHECK(metrics::sir_db(est, refs, 0) == doctest::Approx(19.0848).epsilon(0.02));
}

TEST_CASE("sir rejects zero-energy references") {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(100);
  Eigen::VectorXd r = Eigen::VectorXd::Ones(100);
  std::vector<Eigen::VectorXd> refs{z, r};
  CHECK_THROWS_AS(metrics::sir_db(r, refs, 0), ConfigError);
}
