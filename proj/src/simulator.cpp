// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/simulator.hpp"

#include <cmath>

#include "swbss/errors.hpp"
#include "swbss/fft.hpp"

namespace swbss::sim {

namespace {

constexpr double kSoundSpeed = 343.0;

void SceneSpecCheck(const SceneSpec& s) {
  if (s.num_sources < 1 || s.num_mics < s.num_sources) {
    throw ConfigError("scene: need mics >= sources >= 1");
  }
  if (s.duration_s <= 0.0) throw ConfigError("scene: duration must be positive");
  if (s.rt60_s < 0.0) throw ConfigError("scene: rt60 must be >= 0");
  if (s.sample_rate <= 0.0) throw ConfigError("scene: bad sample rate");
}

// Linear array along x with slight jitter, centered in a nominal room.
std::vector<Eigen::Vector3d> gen_mic_positions(const SceneSpec& spec, Rng rng) {
  std::vector<Eigen::Vector3d> mics(spec.num_mics);
  const double spacing = 0.08;
  for (int m = 0; m < spec.num_mics; ++m) {
    mics[m] = Eigen::Vector3d(2.0 + spacing * m + rng.uniform(-0.005, 0.005),
                              1.5 + rng.uniform(-0.005, 0.005),
                              1.2 + rng.uniform(-0.005, 0.005));
  }
  return mics;
}

Eigen::Vector3d gen_source_position(const SceneSpec& spec, int source_idx, Rng rng) {
  // Sources spread in azimuth around the array at 1 to 2.5 m so the mixing
  // has both level and phase diversity.
  const double base_az = 2.0 * M_PI * source_idx / std::max(2, spec.num_sources);
  const double az = base_az + rng.uniform(-0.5, 0.5);
  const double dist = rng.uniform(1.0, 2.5);
  const double el = rng.uniform(-0.25, 0.25);
  Eigen::Vector3d center(2.0 + 0.04 * (spec.num_mics - 1), 1.5, 1.2);
  return center + dist * Eigen::Vector3d(std::cos(az) * std::cos(el),
                                         std::sin(az) * std::cos(el), std::sin(el));
}

// Windowed-sinc fractional-delay taps added into the response row.
void add_impulse(Eigen::MatrixXd& rir, int mic, double delay_samples, double gain) {
  constexpr int kHalf = 16;
  const int lo = std::max(0, static_cast<int>(std::floor(delay_samples)) - kHalf);
  const int hi = std::min(static_cast<int>(rir.cols()) - 1,
                          static_cast<int>(std::ceil(delay_samples)) + kHalf);
  for (int k = lo; k <= hi; ++k) {
    const double t = k - delay_samples;
    double sinc = t == 0.0 ? 1.0 : std::sin(M_PI * t) / (M_PI * t);
    double win = 0.5 + 0.5 * std::cos(M_PI * t / (kHalf + 1));
    rir(mic, k) += gain * sinc * win;
  }
}

}  // namespace

void SceneSpec::validate() const { SceneSpecCheck(*this); }

Rir gen_rir(const SceneSpec& spec, int source_idx) {
  spec.validate();
  Rng root(spec.seed);
  Rng geo = root.stream("geometry");
  Rng src = root.stream("source_pos_" + std::to_string(source_idx));
  Rng refl = root.stream("reflections_" + std::to_string(source_idx));
  Rng tail_rng = root.stream("tail_" + std::to_string(source_idx));

  const double fs = spec.sample_rate;
  auto mics = gen_mic_positions(spec, geo);
  Eigen::Vector3d pos = gen_source_position(spec, source_idx, src);

  const int early_len = static_cast<int>(spec.direct_to_early_ms / 1000.0 * fs);
  const int tail_len =
      spec.rt60_s > 0.0 ? static_cast<int>(std::ceil(spec.rt60_s * fs)) : 0;
  const int taps = static_cast<int>(0.05 * fs) + early_len + tail_len + 64;

  Rir rir;
  rir.early = Eigen::MatrixXd::Zero(spec.num_mics, taps);
  rir.late = Eigen::MatrixXd::Zero(spec.num_mics, taps);

  double min_delay = 1e30;
  std::vector<double> direct_delay(spec.num_mics), direct_gain(spec.num_mics);
  for (int m = 0; m < spec.num_mics; ++m) {
    const double dist = std::max(0.1, (pos - mics[m]).norm());
    direct_delay[m] = dist / kSoundSpeed * fs + 32.0;  // offset keeps taps causal
    direct_gain[m] = 1.0 / dist;
    min_delay = std::min(min_delay, direct_delay[m]);
  }
  rir.direct_delay = static_cast<int>(std::floor(min_delay));
  const int split = rir.direct_delay + early_len;

  for (int m = 0; m < spec.num_mics; ++m) {
    add_impulse(rir.early, m, direct_delay[m], direct_gain[m]);
  }

  if (spec.rt60_s > 0.0) {
    // Discrete early reflections from virtual sources drawn around the
    // geometry; arrival inside the early window goes to the early part.
    const int num_refl = 8;
    for (int k = 0; k < num_refl; ++k) {
      Eigen::Vector3d virt =
          pos + Eigen::Vector3d(refl.uniform(-4.0, 4.0), refl.uniform(-4.0, 4.0),
                                refl.uniform(-2.0, 2.0));
      const double coeff = 0.5 * std::pow(0.75, k) * (refl.uniform() < 0.5 ? -1.0 : 1.0);
      for (int m = 0; m < spec.num_mics; ++m) {
        const double dist = std::max(0.2, (virt - mics[m]).norm());
        const double delay = dist / kSoundSpeed * fs + 32.0;
        const double gain = coeff / dist;
        const bool is_early = delay < split;
        add_impulse(is_early ? rir.early : rir.late, m, delay, gain);
      }
    }

    // Diffuse tail: independent Gaussian taps under an exponential envelope
    // that drops 60 dB over rt60.
    const double decay = 3.0 * std::log(10.0) / (spec.rt60_s * fs);
    const double tail_level = 0.07 / std::max(0.1, (pos - mics[0]).norm());
    for (int m = 0; m < spec.num_mics; ++m) {
      for (int k = split; k < taps; ++k) {
        const double env = tail_level * std::exp(-decay * (k - split));
        rir.late(m, k) += env * tail_rng.normal();
      }
    }
  }
  return rir;
}

namespace {

// Amplitude-modulated formant-filtered noise bursts with silence gaps.
Eigen::VectorXd gen_dry_source(const SceneSpec& spec, int source_idx, Rng rng) {
  const double fs = spec.sample_rate;
  const Eigen::Index len = static_cast<Eigen::Index>(spec.duration_s * fs);
  Eigen::VectorXd sig(len);
  for (Eigen::Index s = 0; s < len; ++s) sig(s) = rng.normal();

  // Two resonant biquads give a crude formant structure.
  for (int stage = 0; stage < 2; ++stage) {
    const double fc = rng.uniform(300.0, 2500.0);
    const double q = rng.uniform(3.0, 8.0);
    const double w0 = 2.0 * M_PI * fc / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double b0 = alpha, b2 = -alpha;
    const double a0 = 1.0 + alpha, a1 = -2.0 * std::cos(w0), a2 = 1.0 - alpha;
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (Eigen::Index s = 0; s < len; ++s) {
      const double x0 = sig(s);
      const double y0 = (b0 * x0 + b2 * x2 - a1 * y1 - a2 * y2) / a0;
      x2 = x1; x1 = x0; y2 = y1; y1 = y0;
      sig(s) = y0;
    }
  }

  // Burst gate with raised-cosine ramps plus a slow syllabic modulation.
  const double ramp_s = 0.02;
  const int ramp = static_cast<int>(ramp_s * fs);
  const double mod_hz = rng.uniform(3.0, 7.0);
  const double mod_phase = rng.uniform(0.0, 2.0 * M_PI);
  Eigen::VectorXd env = Eigen::VectorXd::Zero(len);
  Eigen::Index pos = static_cast<Eigen::Index>(rng.uniform(0.0, 0.4) * fs);
  bool active = source_idx % 2 == 0;  // stagger sources so overlap is partial
  while (pos < len) {
    const double span_s = active ? rng.uniform(0.2, 0.5) : rng.uniform(0.08, 0.35);
    Eigen::Index span = static_cast<Eigen::Index>(span_s * fs);
    if (active) {
      for (Eigen::Index k = 0; k < span && pos + k < len; ++k) {
        double g = 1.0;
        if (k < ramp) g = 0.5 - 0.5 * std::cos(M_PI * k / ramp);
        if (span - k < ramp) g = std::min(g, 0.5 - 0.5 * std::cos(M_PI * (span - k) / ramp));
        env(pos + k) = g;
      }
    }
    pos += span;
    active = !active;
  }
  for (Eigen::Index s = 0; s < len; ++s) {
    const double am = 0.65 + 0.35 * std::fabs(std::sin(2.0 * M_PI * mod_hz * s / fs + mod_phase));
    sig(s) *= env(s) * am;
  }

  const double rms = std::sqrt(sig.squaredNorm() / len);
  if (rms > 0.0) sig *= 0.1 / rms;
  return sig;
}

Eigen::MatrixXd convolve_multichannel(const Eigen::VectorXd& src,
                                      const Eigen::MatrixXd& rir,
                                      Eigen::Index out_len) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rir.rows(), out_len);
  std::vector<double> s(src.data(), src.data() + src.size());
  for (int m = 0; m < rir.rows(); ++m) {
    std::vector<double> h(rir.cols());
    for (int k = 0; k < rir.cols(); ++k) h[k] = rir(m, k);
    std::vector<double> y = fft_convolve(s, h);
    const Eigen::Index n = std::min<Eigen::Index>(out_len, y.size());
    for (Eigen::Index k = 0; k < n; ++k) out(m, k) = y[k];
  }
  return out;
}

// Spatially diffuse stationary noise: per-bin mixing of independent complex
// Gaussian spectra with a sinc coherence profile from the mic spacing.
Eigen::MatrixXd gen_diffuse_noise(const SceneSpec& spec,
                                  const std::vector<Eigen::Vector3d>& mics,
                                  Eigen::Index len, Rng rng) {
  const int m = spec.num_mics;
  spectral::StftConfig cfg;
  const int frames = spectral::num_frames(len, cfg);
  const int bins = cfg.frame_len / 2 + 1;
  CTensor spec_noise(m, frames, bins);

  for (int f = 0; f < bins; ++f) {
    const double freq = f * spec.sample_rate / cfg.frame_len;
    Eigen::MatrixXd coh(m, m);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        const double x = 2.0 * M_PI * freq * (mics[a] - mics[b]).norm() / kSoundSpeed;
        coh(a, b) = x == 0.0 ? 1.0 : std::sin(x) / x;
      }
    }
    coh.diagonal().array() += 1e-4;
    Eigen::LLT<Eigen::MatrixXd> llt(coh);
    Eigen::MatrixXd mix = llt.matrixL();
    // Mild low-pass tilt so the noise is not harsh white.
    const double shape = 1.0 / std::sqrt(1.0 + std::pow(freq / 2500.0, 2.0));
    for (int t = 0; t < frames; ++t) {
      Eigen::VectorXcd g(m);
      for (int a = 0; a < m; ++a) g(a) = rng.complex_normal();
      Eigen::VectorXcd v = shape * (mix * g);
      for (int a = 0; a < m; ++a) spec_noise(a, t, f) = v(a);
    }
  }
  Waveform w = spectral::istft(spec_noise, cfg, len, spec.sample_rate);
  return w.samples;
}

}  // namespace

SceneTruth gen_scene(const SceneSpec& spec) {
  spec.validate();
  Rng root(spec.seed);

  SceneTruth scene;
  scene.spec = spec;
  scene.mic_pos = gen_mic_positions(spec, root.stream("geometry"));

  const double fs = spec.sample_rate;
  const Eigen::Index len = static_cast<Eigen::Index>(spec.duration_s * fs);
  Eigen::MatrixXd mix = Eigen::MatrixXd::Zero(spec.num_mics, len);

  for (int n = 0; n < spec.num_sources; ++n) {
    Eigen::VectorXd dry = gen_dry_source(spec, n, root.stream("dry_" + std::to_string(n)));
    Rir rir = gen_rir(spec, n);

    Waveform desired{convolve_multichannel(dry, rir.early, len), fs};
    Waveform late{convolve_multichannel(dry, rir.late, len), fs};
    mix += desired.samples + late.samples;

    scene.dry.push_back(Waveform{dry.transpose(), fs});
    scene.desired.push_back(std::move(desired));
    scene.late.push_back(std::move(late));
    scene.rirs.push_back(std::move(rir));
  }

  scene.noise.sample_rate = fs;
  if (std::isinf(spec.snr_db)) {
    scene.noise.samples = Eigen::MatrixXd::Zero(spec.num_mics, len);
  } else {
    Eigen::MatrixXd noise =
        gen_diffuse_noise(spec, scene.mic_pos, len, root.stream("noise"));
    const double sig_pow = mix.squaredNorm();
    const double noise_pow = noise.squaredNorm();
    if (noise_pow > 0.0 && sig_pow > 0.0) {
      noise *= std::sqrt(sig_pow / noise_pow * std::pow(10.0, -spec.snr_db / 10.0));
    }
    scene.noise.samples = std::move(noise);
  }

  scene.mixture.sample_rate = fs;
  scene.mixture.samples = mix + scene.noise.samples;
  return scene;
}

atf_init::AtfSet truth_atf(const SceneTruth& scene, const spectral::StftConfig& cfg,
                           int ref_channel) {
  cfg.validate();
  const int n_src = static_cast<int>(scene.rirs.size());
  const int m = scene.spec.num_mics;
  const int bins = cfg.frame_len / 2 + 1;

  atf_init::AtfSet atf;
  atf.num_sources = n_src;
  atf.channels = m;
  atf.bins = bins;
  atf.ref_channel = ref_channel;
  atf.a.assign(static_cast<size_t>(n_src) * bins, Eigen::VectorXcd::Zero(m));

  RealFft fft(cfg.frame_len);
  std::vector<double> buf(cfg.frame_len);
  std::vector<cd> freq(bins);
  for (int n = 0; n < n_src; ++n) {
    const Eigen::MatrixXd& early = scene.rirs[n].early;
    std::vector<std::vector<cd>> per_mic(m, std::vector<cd>(bins));
    for (int mic = 0; mic < m; ++mic) {
      std::fill(buf.begin(), buf.end(), 0.0);
      const int taps = std::min<int>(cfg.frame_len, static_cast<int>(early.cols()));
      for (int k = 0; k < taps; ++k) buf[k] = early(mic, k);
      fft.forward(buf.data(), per_mic[mic].data());
    }
    for (int f = 0; f < bins; ++f) {
      for (int mic = 0; mic < m; ++mic) atf.at(n, f)(mic) = per_mic[mic][f];
    }
  }
  return atf;
}

}  // namespace swbss::sim
