// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/optimizer.hpp"

#include <cmath>
#include <sstream>

#include "swbss/errors.hpp"
#include "swbss/metrics.hpp"
#include "swbss/swiva.hpp"
#include "swbss/swwpe.hpp"

namespace swbss::optimizer {

namespace {

double mean_frame_power(const CTensor& x) {
  double acc = 0.0;
  for (int f = 0; f < x.bins(); ++f) {
    for (int t = 0; t < x.frames(); ++t) acc += x.frame_vec(t, f).squaredNorm();
  }
  return acc / (static_cast<double>(x.frames()) * x.bins() * x.rows());
}

// Algorithm-3 switch draw: each entry uniform in 1 +- 1e-3, then normalized
// over states.
RTensor draw_switch(Rng& rng, int states, int frames, int bins) {
  RTensor g(states, frames, bins);
  for (int f = 0; f < bins; ++f) {
    for (int t = 0; t < frames; ++t) {
      double sum = 0.0;
      for (int i = 0; i < states; ++i) {
        double v = rng.uniform(1.0 - 1e-3, 1.0 + 1e-3);
        g(i, t, f) = v;
        sum += v;
      }
      for (int i = 0; i < states; ++i) g(i, t, f) /= sum;
    }
  }
  return g;
}

std::vector<long> state_frame_counts(const SwitchWeights& b) {
  std::vector<double> acc(static_cast<size_t>(b.num_i()) * b.num_j(), 0.0);
  for (int f = 0; f < b.bins(); ++f) {
    for (int t = 0; t < b.frames(); ++t) {
      for (int i = 0; i < b.num_i(); ++i) {
        for (int j = 0; j < b.num_j(); ++j) acc[i * b.num_j() + j] += b(i, j, t, f);
      }
    }
  }
  std::vector<long> out(acc.size());
  for (size_t k = 0; k < acc.size(); ++k) out[k] = std::lround(acc[k]);
  return out;
}

swiva::SwivaRoundOptions round_options(const RunConfig& cfg, int channels) {
  swiva::SwivaRoundOptions opt;
  opt.sweeps = cfg.sweeps_per_round;
  opt.coarse_fine = cfg.coarse_fine;
  opt.diagonal_switch = cfg.switching_model == SwitchingModel::kDirect;
  opt.loading = cfg.loading;
  opt.blend_min_mass = std::max<double>(
      channels * (cfg.filter_span - cfg.prediction_delay), 8.0);
  return opt;
}

// Collects per-step likelihood records through the swiva_round observer and
// the G-step bracketing below.
struct TraceCollector {
  Diagnostics* diag = nullptr;
  bool full = false;
  bool coarse_objective = true;  // whether the W sweep optimizes the coarse form
  int w_updates = 0;
  double pending_coarse = 0.0;
  double pending_fine = 0.0;

  double w_objective(const ModelState& s) const {
    return coarse_objective ? metrics::log_likelihood_coarse(s)
                            : metrics::log_likelihood(s);
  }

  void operator()(std::string_view step, const ModelState& s) {
    if (step == "w_post") ++w_updates;
    if (!full || diag == nullptr) return;
    if (step == "w_pre") {
      pending_coarse = w_objective(s);
    } else if (step == "w_post") {
      StepRecord rec;
      rec.w_updates = w_updates;
      rec.step = "w";
      rec.coarse_before = pending_coarse;
      rec.coarse_after = w_objective(s);
      rec.has_coarse = true;
      rec.state_frames = state_frame_counts(s.beta);
      diag->trace.push_back(std::move(rec));
    } else if (step == "lambda_post") {
      pending_fine = metrics::log_likelihood(s);
      StepRecord rec;
      rec.w_updates = w_updates;
      rec.step = "lambda";
      rec.ll_fine_after = pending_fine;
      rec.has_fine = true;
      rec.state_frames = state_frame_counts(s.beta);
      diag->trace.push_back(std::move(rec));
    } else if (step == "beta_post") {
      StepRecord rec;
      rec.w_updates = w_updates;
      rec.step = "beta";
      rec.ll_fine_before = pending_fine;
      rec.ll_fine_after = metrics::log_likelihood(s);
      rec.has_fine = true;
      rec.state_frames = state_frame_counts(s.beta);
      diag->trace.push_back(std::move(rec));
    }
  }
};

void g_step(ModelState& s, const RunConfig& cfg, TraceCollector& trace,
            Diagnostics* diag) {
  double before = 0.0;
  if (trace.full && diag) before = metrics::log_likelihood(s);

  auto cov = swwpe::accumulate_cov(s.x, s.stacked_past, s.beta, s.lam.fine);
  auto eq = swwpe::assemble_normal_eq(cov, s.sep);
  s.filters = swwpe::update_prediction_filters(eq, cfg.loading);
  s.z = swwpe::apply_mclp(s.x, s.stacked_past, s.filters);

  if (trace.full && diag) {
    StepRecord rec;
    rec.w_updates = trace.w_updates;
    rec.step = "g";
    rec.ll_fine_before = before;
    rec.ll_fine_after = metrics::log_likelihood(s);
    rec.has_fine = true;
    rec.state_frames = state_frame_counts(s.beta);
    diag->trace.push_back(std::move(rec));
  }
}

void push_round_summary(const ModelState& s, Diagnostics* diag, int w_updates) {
  if (!diag) return;
  StepRecord rec;
  rec.w_updates = w_updates;
  rec.step = "round";
  rec.ll_fine_after = metrics::log_likelihood(s);
  rec.has_fine = true;
  rec.state_frames = state_frame_counts(s.beta);
  diag->trace.push_back(std::move(rec));
}

// Lines 1-11 of the simple-initialization scheme, with the spatially guided
// substitution of the separation-matrix and variance lines when configured.
ModelState init_state(const CTensor& x, const RunConfig& cfg, Rng& rng,
                      TraceCollector& trace, Diagnostics* diag,
                      const RTensor* masks) {
  const int frames = x.frames();
  const int bins = x.bins();
  const int m = x.rows();
  const int num_i = cfg.uses_mclp() ? cfg.mclp_states : 1;
  const int num_j = cfg.sep_states;
  const bool direct = cfg.switching_model == SwitchingModel::kDirect;

  ModelState s;
  s.x = x;
  s.num_sources = cfg.num_sources;
  s.ref_channel = cfg.ref_channel;
  s.lam.eps = cfg.eps_rel * mean_frame_power(x);

  RTensor gamma, delta;
  if (cfg.uses_mclp()) {
    s.stacked_past = build_stacked_past(x, cfg.prediction_delay, cfg.filter_span);
    Rng gr = rng.stream("switch_init_gamma");
    gamma = draw_switch(gr, num_i, frames, bins);
    if (direct) {
      delta = gamma;  // one shared switch
    } else {
      Rng dr = rng.stream("switch_init_delta");
      delta = draw_switch(dr, num_j, frames, bins);
    }
    auto wpe = swwpe::plain_swwpe_step(x, s.stacked_past, gamma, s.lam.eps,
                                       cfg.loading);
    s.filters = std::move(wpe.filters);
    s.z = std::move(wpe.z);
    gamma = std::move(wpe.gamma);
    if (direct) delta = gamma;
  } else {
    s.z = {x};
    gamma = RTensor(1, frames, bins);
    for (int f = 0; f < bins; ++f) {
      for (int t = 0; t < frames; ++t) gamma(0, t, f) = 1.0;
    }
    Rng dr = rng.stream("switch_init_delta");
    delta = draw_switch(dr, num_j, frames, bins);
  }

  if (cfg.init == InitScheme::kSpatiallyGuided) {
    if (masks == nullptr) {
      throw ConfigError("spatially guided initialization requires a mask tensor");
    }
    CTensor z_init =
        cfg.uses_mclp() ? atf_init::dereverb_for_init(gamma, s.z) : x;
    auto covs = atf_init::masked_covariances(z_init, *masks);
    auto atfs = atf_init::estimate_atf(covs, cfg.ref_channel, cfg.loading);
    Rng ar = rng.stream("alpha");
    auto sp = atf_init::mpdr_init(z_init, atfs, num_j, ar, cfg.loading);
    s.sep = std::move(sp.sep);
    s.lam.fine = atf_init::init_variances_sg(z_init, sp, cfg.num_sources, s.lam.eps);
  } else {
    s.sep = SeparationMatrices::identity(num_j, bins, m);
    s.lam.fine = RTensor(m, frames, bins);
    for (int f = 0; f < bins; ++f) {
      for (int t = 0; t < frames; ++t) {
        for (int n = 0; n < m; ++n) s.lam.fine(n, t, f) = 1.0;
      }
    }
  }
  s.lam.coarse = swiva::coarsen_variances(s.lam.fine);

  s.beta = SwitchWeights(num_i, num_j, frames, bins);
  for (int f = 0; f < bins; ++f) {
    for (int t = 0; t < frames; ++t) {
      for (int i = 0; i < num_i; ++i) {
        for (int j = 0; j < num_j; ++j) {
          if (direct && i != j) continue;
          s.beta(i, j, t, f) = gamma(i, t, f) * delta(j, t, f);
        }
      }
    }
  }
  if (direct) {
    // The shared hard switch makes the diagonal sum exact already; guard
    // against soft leftovers by renormalizing.
    for (int f = 0; f < bins; ++f) {
      for (int t = 0; t < frames; ++t) {
        double sum = s.beta.sum_at(t, f);
        for (int k = 0; k < num_i; ++k) s.beta(k, k, t, f) /= sum;
      }
    }
  }

  auto stats = swiva::swiva_round(s, round_options(cfg, m), std::ref(trace));
  if (diag) {
    diag->degenerate_states += stats.degenerate_states;
    diag->aborted_bins += stats.aborted_bins;
  }
  return s;
}

RunResult run(const CTensor& x, RunConfig cfg, const RTensor* masks);

}  // namespace

void RunConfig::validate() const {
  if (num_sources < 1) throw ConfigError("config: num_sources must be >= 1");
  if (mclp_states < 1 || sep_states < 1) throw ConfigError("config: state counts must be >= 1");
  if (sweeps_per_round < 1) throw ConfigError("config: sweeps_per_round must be >= 1");
  if (total_w_updates < sweeps_per_round) {
    throw ConfigError("config: total_w_updates must cover at least one round");
  }
  if (uses_mclp() && (prediction_delay < 1 || filter_span <= prediction_delay)) {
    throw ConfigError("config: need filter_span > prediction_delay >= 1");
  }
  if (switching_model == SwitchingModel::kDirect) {
    if (mode != Mode::kSwCiva) {
      throw ConfigError("config: direct switching model applies to swCIVA only");
    }
    if (mclp_states != sep_states) {
      throw ConfigError("config: direct switching model requires I == J");
    }
  }
  if (init == InitScheme::kSingleState &&
      single_state_w_updates >= total_w_updates) {
    throw ConfigError("config: single-state phase must end before the last update");
  }
  if (eps_rel <= 0.0) throw ConfigError("config: eps_rel must be positive");
}

ModelState simple_init(const CTensor& x, const RunConfig& cfg, Rng& rng,
                       Diagnostics* diag, const RTensor* masks) {
  TraceCollector trace{diag, cfg.trace == RunConfig::Trace::kFull, cfg.coarse_fine};
  return init_state(x, cfg, rng, trace, diag, masks);
}

ModelState single_state_init(const CTensor& x, const RunConfig& cfg, Rng& rng,
                             Diagnostics* diag) {
  RunConfig sub = cfg;
  sub.sep_states = 1;
  sub.init = InitScheme::kSimple;
  if (cfg.switching_model == SwitchingModel::kDirect) sub.mclp_states = 1;

  TraceCollector trace{diag, cfg.trace == RunConfig::Trace::kFull, cfg.coarse_fine};
  ModelState s = init_state(x, sub, rng, trace, diag, nullptr);
  int w_done = sub.sweeps_per_round;

  while (w_done < cfg.single_state_w_updates) {
    if (sub.uses_mclp()) g_step(s, sub, trace, diag);
    swiva::SwivaRoundOptions opt = round_options(sub, x.rows());
    opt.sweeps = std::min(sub.sweeps_per_round, cfg.single_state_w_updates - w_done);
    auto stats = swiva::swiva_round(s, opt, std::ref(trace));
    if (diag) {
      diag->degenerate_states += stats.degenerate_states;
      diag->aborted_bins += stats.aborted_bins;
    }
    w_done += opt.sweeps;
    if (cfg.trace == RunConfig::Trace::kLight) push_round_summary(s, diag, w_done);
  }

  // Re-initialization: copy the single matrix to every state, re-randomize
  // the separation switch, and spread the unified weights over it.
  const int num_i = s.beta.num_i();
  const int num_j = cfg.sep_states;
  const bool direct = cfg.switching_model == SwitchingModel::kDirect;

  SeparationMatrices sep(SeparationMatrices::identity(num_j, x.bins(), x.rows()));
  for (int j = 0; j < num_j; ++j) {
    for (int f = 0; f < x.bins(); ++f) sep.at(j, f) = s.sep.at(0, f);
  }
  s.sep = std::move(sep);

  Rng dr = rng.stream("switch_reinit_delta");
  RTensor delta = draw_switch(dr, num_j, x.frames(), x.bins());

  if (direct) {
    // Whole CBFs are duplicated: prediction filters follow the matrices.
    PredictionFilters filters =
        PredictionFilters::zeros(num_j, x.bins(), s.stacked_past.rows(), x.rows());
    for (int i = 0; i < num_j; ++i) {
      for (int f = 0; f < x.bins(); ++f) filters.at(i, f) = s.filters.at(0, f);
    }
    s.filters = std::move(filters);
    std::vector<CTensor> z;
    for (int i = 0; i < num_j; ++i) z.push_back(s.z[0]);
    s.z = std::move(z);

    SwitchWeights nb(num_j, num_j, x.frames(), x.bins());
    for (int f = 0; f < x.bins(); ++f) {
      for (int t = 0; t < x.frames(); ++t) {
        for (int k = 0; k < num_j; ++k) {
          nb(k, k, t, f) = s.beta(0, 0, t, f) * delta(k, t, f);
        }
      }
    }
    s.beta = std::move(nb);
  } else {
    SwitchWeights nb(num_i, num_j, x.frames(), x.bins());
    for (int f = 0; f < x.bins(); ++f) {
      for (int t = 0; t < x.frames(); ++t) {
        for (int i = 0; i < num_i; ++i) {
          for (int j = 0; j < num_j; ++j) {
            nb(i, j, t, f) = s.beta(i, 0, t, f) * delta(j, t, f);
          }
        }
      }
    }
    s.beta = std::move(nb);
  }
  return s;
}

CTensor projection_back(const ModelState& s, const linalg::LoadingPolicy& p) {
  const int m = s.channels();
  CTensor y = swiva::compute_outputs(s.z, s.sep, s.beta);
  RTensor delta = marginals(s.beta).delta;

  // Scale that maps output n back onto the reference channel: the (r, n)
  // entry of W^-H, i.e. conj of row n of W^-1 at column r.
  const int num_j = s.sep.num_states;
  std::vector<Eigen::VectorXcd> coef(static_cast<size_t>(num_j) * s.bins());
  for (int j = 0; j < num_j; ++j) {
    for (int f = 0; f < s.bins(); ++f) {
      const Eigen::MatrixXcd& w = s.sep.at(j, f);
      Eigen::VectorXcd a;
      Eigen::FullPivLU<Eigen::MatrixXcd> lu(w);
      if (lu.isInvertible()) {
        a = lu.solve(Eigen::VectorXcd::Unit(m, s.ref_channel));
      } else {
        a = linalg::hermitian_solve(
            w.adjoint() * w, w.adjoint() * Eigen::VectorXcd::Unit(m, s.ref_channel),
            p);
      }
      coef[static_cast<size_t>(j) * s.bins() + f] = a.conjugate();
    }
  }

  CTensor out(m, s.frames(), s.bins());
  for (int f = 0; f < s.bins(); ++f) {
    for (int t = 0; t < s.frames(); ++t) {
      for (int n = 0; n < m; ++n) {
        cd scale = 0.0;
        for (int j = 0; j < num_j; ++j) {
          const double d = delta(j, t, f);
          if (d == 0.0) continue;
          scale += d * coef[static_cast<size_t>(j) * s.bins() + f](n);
        }
        out(n, t, f) = scale * y(n, t, f);
      }
    }
  }
  return out;
}

namespace {

RunResult run(const CTensor& x, RunConfig cfg, const RTensor* masks) {
  if (cfg.mode == Mode::kSwIva) cfg.mclp_states = 1;
  cfg.validate();
  if (!x.all_finite()) throw ConfigError("run: observation has non-finite values");
  if (x.rows() < cfg.num_sources) {
    throw ConfigError("run: fewer channels than sources");
  }
  if (masks != nullptr &&
      (masks->frames() != x.frames() || masks->bins() != x.bins() ||
       masks->rows() != cfg.num_sources)) {
    throw ConfigError("run: mask tensor shape mismatch");
  }

  Rng rng(cfg.seed);
  RunResult res;
  TraceCollector trace{&res.diag, cfg.trace == RunConfig::Trace::kFull,
                       cfg.coarse_fine};

  int w_done = 0;
  if (cfg.init == InitScheme::kSingleState && cfg.sep_states > 1) {
    res.state = single_state_init(x, cfg, rng, &res.diag);
    w_done = cfg.single_state_w_updates;
    trace.w_updates = w_done;
  } else {
    res.state = init_state(x, cfg, rng, trace, &res.diag, masks);
    w_done = trace.w_updates;
    if (cfg.trace == RunConfig::Trace::kLight) {
      push_round_summary(res.state, &res.diag, w_done);
    }
  }

  double last_ll = 0.0;
  bool have_last = false;
  while (w_done < cfg.total_w_updates) {
    if (cfg.uses_mclp()) g_step(res.state, cfg, trace, &res.diag);

    swiva::SwivaRoundOptions opt = round_options(cfg, x.rows());
    opt.sweeps = std::min(cfg.sweeps_per_round, cfg.total_w_updates - w_done);
    auto stats = swiva::swiva_round(res.state, opt, std::ref(trace));
    res.diag.degenerate_states += stats.degenerate_states;
    res.diag.aborted_bins += stats.aborted_bins;
    w_done += opt.sweeps;
    trace.w_updates = w_done;
    if (cfg.trace == RunConfig::Trace::kLight) {
      push_round_summary(res.state, &res.diag, w_done);
    }

    if (cfg.early_stop) {
      double ll = metrics::log_likelihood(res.state);
      if (have_last && std::isfinite(ll) &&
          std::abs(ll - last_ll) < cfg.early_stop_rel * std::abs(last_ll)) {
        break;
      }
      last_ll = ll;
      have_last = true;
    }
  }

  CTensor scaled = projection_back(res.state, cfg.loading);
  res.outputs = CTensor(cfg.num_sources, x.frames(), x.bins());
  for (int f = 0; f < x.bins(); ++f) {
    for (int t = 0; t < x.frames(); ++t) {
      for (int n = 0; n < cfg.num_sources; ++n) {
        res.outputs(n, t, f) = scaled(n, t, f);
      }
    }
  }
  return res;
}

}  // namespace

RunResult run_swciva(const CTensor& x, const RunConfig& cfg, const RTensor* masks) {
  RunConfig c = cfg;
  c.mode = Mode::kSwCiva;
  return run(x, c, masks);
}

RunResult run_swiva(const CTensor& x, const RunConfig& cfg, const RTensor* masks) {
  RunConfig c = cfg;
  c.mode = Mode::kSwIva;
  c.mclp_states = 1;
  return run(x, c, masks);
}

std::string format_trace(const Diagnostics& diag) {
  std::ostringstream os;
  os.precision(12);
  os << std::scientific;
  for (const StepRecord& rec : diag.trace) {
    os << "iter=" << rec.w_updates << " step=" << rec.step;
    if (rec.has_fine) {
      if (rec.step != "lambda" && rec.step != "round") {
        os << " ll_fine_before=" << rec.ll_fine_before;
      }
      os << " ll_fine=" << rec.ll_fine_after;
    }
    if (rec.has_coarse) {
      os << " ll_coarse_before=" << rec.coarse_before
         << " ll_coarse=" << rec.coarse_after;
    }
    os << " frames=";
    for (size_t k = 0; k < rec.state_frames.size(); ++k) {
      if (k) os << ',';
      os << rec.state_frames[k];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace swbss::optimizer
