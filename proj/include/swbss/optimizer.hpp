// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "swbss/atf_init.hpp"
#include "swbss/linalg.hpp"
#include "swbss/model.hpp"
#include "swbss/rng.hpp"

namespace swbss::optimizer {

enum class Mode { kSwIva, kSwCiva };
enum class SwitchingModel { kFactorized, kDirect };
enum class InitScheme { kSimple, kSingleState, kSpatiallyGuided };

struct RunConfig {
  Mode mode = Mode::kSwCiva;
  SwitchingModel switching_model = SwitchingModel::kFactorized;
  InitScheme init = InitScheme::kSimple;
  int num_sources = 2;        // N; outputs beyond N act as noise estimates
  int mclp_states = 1;        // I (forced to 1 in swIVA mode)
  int sep_states = 1;         // J
  int sweeps_per_round = 5;   // K separation sweeps per MCLP update
  int total_w_updates = 50;
  int prediction_delay = 2;   // D, frames
  int filter_span = 10;       // L, frames
  int single_state_w_updates = 25;
  int ref_channel = 0;
  uint64_t seed = 0;
  double eps_rel = 1e-6;      // variance floor relative to mean frame power
  bool coarse_fine = true;
  bool early_stop = false;
  double early_stop_rel = 1e-7;
  linalg::LoadingPolicy loading;

  enum class Trace { kLight, kFull } trace = Trace::kLight;

  void validate() const;  // throws ConfigError
  bool uses_mclp() const { return mode == Mode::kSwCiva; }
};

// One record per optimization step. Fine-likelihood entries cover the G and
// beta steps; coarse entries bracket each IP sweep at fixed covariances.
struct StepRecord {
  int w_updates = 0;  // W-update counter when the record was taken
  std::string step;
  double ll_fine_before = 0.0, ll_fine_after = 0.0;
  double coarse_before = 0.0, coarse_after = 0.0;
  bool has_fine = false, has_coarse = false;
  std::vector<long> state_frames;  // per (i, j), flattened i * J + j
};

struct Diagnostics {
  std::vector<StepRecord> trace;
  long degenerate_states = 0;
  long aborted_bins = 0;
};

struct RunResult {
  CTensor outputs;  // first N channels, projection-back scaled
  ModelState state;
  Diagnostics diag;
};

// Joint switching dereverberation + separation (Algorithm-1 style loop).
// masks: (N, T, F), required iff init == kSpatiallyGuided.
RunResult run_swciva(const CTensor& x, const RunConfig& cfg,
                     const RTensor* masks = nullptr);

// Separation only; forces mode = kSwIva (I = 1, no MCLP path).
RunResult run_swiva(const CTensor& x, const RunConfig& cfg,
                    const RTensor* masks = nullptr);

// Simple initialization: random near-uniform switches, one plain switching
// WPE pass, identity separation matrices, unit variances, one separation
// round.
ModelState simple_init(const CTensor& x, const RunConfig& cfg, Rng& rng,
                       Diagnostics* diag = nullptr, const RTensor* masks = nullptr);

// Blind single-state initialization: runs the J = 1 optimization for
// single_state_w_updates, copies the matrix to all states, re-randomizes the
// separation switch, and redistributes the unified weights.
ModelState single_state_init(const CTensor& x, const RunConfig& cfg, Rng& rng,
                             Diagnostics* diag = nullptr);

// Per-source rescaling onto the reference channel through the inverse of
// the selected state's separation matrix, applied frame-wise.
CTensor projection_back(const ModelState& s, const linalg::LoadingPolicy& p = {});

// Serializes diagnostics as line-delimited records.
std::string format_trace(const Diagnostics& diag);

}  // namespace swbss::optimizer
