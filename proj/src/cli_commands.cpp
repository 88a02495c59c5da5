// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <vector>

#include "swbss/cli.hpp"
#include "swbss/config.hpp"
#include "swbss/errors.hpp"
#include "swbss/metrics.hpp"
#include "swbss/optimizer.hpp"
#include "swbss/simulator.hpp"
#include "swbss/spectral.hpp"
#include "swbss/tensor_io.hpp"
#include "swbss/wav.hpp"

namespace fs = std::filesystem;

namespace swbss::cli {

namespace {

template <typename Fn>
int guard(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << text;
  if (!os) throw ConfigError("write failed for " + path);
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

// Output-to-reference assignment by maximum correlation, plus per-source
// metrics against the assigned reference.
struct EvalRow {
  int source = 0;      // reference index
  int est = 0;         // assigned estimate index
  double corr = 0.0;
  double fwssnr = 0.0;
  double sir = 0.0;
  double sir_improvement = 0.0;
};

std::vector<EvalRow> evaluate_signals(const std::vector<Eigen::VectorXd>& ests,
                                      const std::vector<Eigen::VectorXd>& refs,
                                      const Eigen::VectorXd& mix_ref, double fs) {
  const int n = static_cast<int>(refs.size());
  if (static_cast<int>(ests.size()) != n) {
    throw ConfigError("evaluate: estimate/reference count mismatch");
  }

  Eigen::MatrixXd corr(n, n);
  for (int e = 0; e < n; ++e) {
    for (int r = 0; r < n; ++r) {
      double den = ests[e].norm() * refs[r].norm();
      corr(e, r) = den > 0.0 ? std::abs(ests[e].dot(refs[r])) / den : 0.0;
    }
  }

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_score = -1.0;
  do {
    double score = 0.0;
    for (int r = 0; r < n; ++r) score += corr(perm[r], r);
    if (score > best_score) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<EvalRow> rows(n);
  for (int r = 0; r < n; ++r) {
    const int e = best[r];
    EvalRow& row = rows[r];
    row.source = r;
    row.est = e;
    row.corr = corr(e, r);
    Waveform ew{ests[e].transpose(), fs};
    Waveform rw{refs[r].transpose(), fs};
    row.fwssnr = metrics::fwssnr_db(ew, rw);
    row.sir = metrics::sir_db(ests[e], refs, r);
    row.sir_improvement = metrics::sir_improvement_db(ests[e], refs, r, mix_ref);
  }
  return rows;
}

struct SceneFiles {
  sim::SceneTruth scene;
  config::KeyValue manifest;
};

void write_scene(const sim::SceneTruth& scene, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const spectral::StftConfig stft_cfg;

  config::KeyValue manifest = config::scene_spec_to(scene.spec);
  manifest.set("stft.frame_len", std::to_string(stft_cfg.frame_len));
  manifest.set("stft.hop", std::to_string(stft_cfg.hop));
  manifest.set("stft.window", stft_cfg.window);
  manifest.set("file.mixture", "mixture.wav");
  manifest.set("file.noise", "noise.wav");
  manifest.set("file.masks", "masks_oracle.swbt");
  manifest.set("file.atf", "atf_truth.swbt");

  write_wav((dir / "mixture.wav").string(), scene.mixture);
  write_wav((dir / "noise.wav").string(), scene.noise);
  for (size_t n = 0; n < scene.desired.size(); ++n) {
    std::string dn = "desired_" + std::to_string(n + 1) + ".wav";
    std::string ln = "late_" + std::to_string(n + 1) + ".wav";
    write_wav((dir / dn).string(), scene.desired[n]);
    write_wav((dir / ln).string(), scene.late[n]);
    manifest.set("file.desired." + std::to_string(n + 1), dn);
    manifest.set("file.late." + std::to_string(n + 1), ln);
  }

  RTensor masks = atf_init::oracle_masks(scene, stft_cfg, 0);
  write_rtensor((dir / "masks_oracle.swbt").string(), masks);
  manifest.set("frames", std::to_string(masks.frames()));
  manifest.set("bins", std::to_string(masks.bins()));

  atf_init::AtfSet atf = sim::truth_atf(scene, stft_cfg, 0);
  CTensor atf_tensor(atf.num_sources, atf.channels, atf.bins);
  for (int n = 0; n < atf.num_sources; ++n) {
    for (int mic = 0; mic < atf.channels; ++mic) {
      for (int f = 0; f < atf.bins; ++f) atf_tensor(n, mic, f) = atf.at(n, f)(mic);
    }
  }
  write_ctensor((dir / "atf_truth.swbt").string(), atf_tensor);

  write_text((dir / "manifest.txt").string(), manifest.serialize());
}

optimizer::RunResult run_enhancement(const CTensor& x,
                                     const config::EnhanceConfig& cfg,
                                     const RTensor* masks) {
  return cfg.run.mode == optimizer::Mode::kSwIva
             ? optimizer::run_swiva(x, cfg.run, masks)
             : optimizer::run_swciva(x, cfg.run, masks);
}

std::string report_text(const std::vector<EvalRow>& rows) {
  std::ostringstream os;
  os << "source  est  corr    fwssnr_db  sir_db   sir_improvement_db\n";
  double mf = 0.0, ms = 0.0, mi = 0.0;
  for (const EvalRow& r : rows) {
    os << r.source + 1 << "       est_" << r.est + 1 << "  " << fmt(r.corr, 3)
       << "   " << fmt(r.fwssnr, 4) << "    " << fmt(r.sir, 4) << "  "
       << fmt(r.sir_improvement, 4) << '\n';
    mf += r.fwssnr;
    ms += r.sir;
    mi += r.sir_improvement;
  }
  const double n = static_cast<double>(rows.size());
  os << "mean    -      -       " << fmt(mf / n, 4) << "    " << fmt(ms / n, 4)
     << "  " << fmt(mi / n, 4) << '\n';
  return os.str();
}

std::string report_csv(const std::vector<EvalRow>& rows) {
  std::ostringstream os;
  os << "source,est,corr,fwssnr_db,sir_db,sir_improvement_db\n";
  for (const EvalRow& r : rows) {
    os << r.source + 1 << ',' << r.est + 1 << ',' << fmt(r.corr, 6) << ','
       << fmt(r.fwssnr, 6) << ',' << fmt(r.sir, 6) << ',' << fmt(r.sir_improvement, 6)
       << '\n';
  }
  return os.str();
}

}  // namespace

int cmd_simulate(const std::string& spec_path, const std::string& out_dir) {
  return guard([&] {
    config::KeyValue kv = config::KeyValue::parse_file(spec_path);
    sim::SceneSpec spec = config::scene_spec_from(kv);
    sim::SceneTruth scene = sim::gen_scene(spec);
    write_scene(scene, out_dir);
    std::cout << "scene written to " << out_dir << '\n';
    return kExitOk;
  });
}

int cmd_enhance(const std::string& in_dir, const std::string& config_path,
                const std::string& out_dir) {
  return guard([&] {
    config::KeyValue kv = config::KeyValue::parse_file(config_path);
    config::EnhanceConfig cfg = config::enhance_config_from(kv);

    const fs::path in(in_dir);
    Waveform mixture = read_wav((in / "mixture.wav").string());
    CTensor x = spectral::stft(mixture, cfg.stft);

    RTensor masks;
    const RTensor* mask_ptr = nullptr;
    if (cfg.run.init == optimizer::InitScheme::kSpatiallyGuided) {
      fs::path mask_path = cfg.mask_path.empty()
                               ? in / "masks_oracle.swbt"
                               : fs::path(cfg.mask_path);
      if (!fs::exists(mask_path)) {
        throw ConfigError("spatially guided init needs a mask file; not found: " +
                          mask_path.string());
      }
      masks = read_rtensor(mask_path.string());
      mask_ptr = &masks;
    }

    optimizer::RunResult res = run_enhancement(x, cfg, mask_ptr);

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    for (int n = 0; n < cfg.run.num_sources; ++n) {
      CTensor one(1, res.outputs.frames(), res.outputs.bins());
      for (int f = 0; f < res.outputs.bins(); ++f) {
        for (int t = 0; t < res.outputs.frames(); ++t) one(0, t, f) = res.outputs(n, t, f);
      }
      Waveform est = spectral::istft(one, cfg.stft, mixture.num_samples(),
                                     mixture.sample_rate);
      write_wav((out / ("est_" + std::to_string(n + 1) + ".wav")).string(), est);
    }
    write_text((out / "trace.txt").string(), optimizer::format_trace(res.diag));
    write_text((out / "config_echo.txt").string(),
               config::enhance_config_to(cfg).serialize());
    std::cout << "enhanced " << cfg.run.num_sources << " sources into " << out_dir
              << '\n';
    return kExitOk;
  });
}

int cmd_evaluate(const std::string& est_dir, const std::string& truth_dir,
                 const std::string& report_path) {
  return guard([&] {
    const fs::path truth(truth_dir);
    config::KeyValue manifest =
        config::KeyValue::parse_file((truth / "manifest.txt").string());
    const int n = manifest.get_int("sources", 0);
    if (n < 1) throw ConfigError("evaluate: manifest has no sources");

    Waveform mixture = read_wav(
        (truth / manifest.get_str("file.mixture", "mixture.wav")).string());
    Eigen::VectorXd mix_ref = mixture.samples.row(0);

    std::vector<Eigen::VectorXd> refs, ests;
    for (int k = 1; k <= n; ++k) {
      std::string name =
          manifest.get_str("file.desired." + std::to_string(k),
                           "desired_" + std::to_string(k) + ".wav");
      Waveform d = read_wav((truth / name).string());
      refs.push_back(d.samples.row(0));
    }
    for (int k = 1; k <= n; ++k) {
      fs::path p = fs::path(est_dir) / ("est_" + std::to_string(k) + ".wav");
      if (!fs::exists(p)) {
        throw ConfigError("evaluate: missing estimate " + p.string());
      }
      Waveform e = read_wav(p.string());
      ests.push_back(e.samples.row(0));
    }

    const Eigen::Index len =
        std::min({mix_ref.size(), refs[0].size(), ests[0].size()});
    mix_ref.conservativeResize(len);
    for (auto& r : refs) r.conservativeResize(len);
    for (auto& e : ests) e.conservativeResize(len);

    std::vector<EvalRow> rows =
        evaluate_signals(ests, refs, mix_ref, mixture.sample_rate);

    write_text(report_path, report_text(rows));
    write_text(report_path + ".csv", report_csv(rows));
    std::cout << report_text(rows);
    return kExitOk;
  });
}

namespace {

struct SweepCell {
  std::string name;
  config::EnhanceConfig cfg;
  bool failed = false;
  std::string error;
  std::vector<double> fwssnr;  // per scene, mean over sources
  std::vector<double> sir_improvement;
};

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / (v.size() - 1));
}

}  // namespace

int cmd_sweep(const std::string& grid_path, const std::string& out_csv) {
  return guard([&] {
    config::KeyValue grid = config::KeyValue::parse_file(grid_path);
    const int scenes = grid.get_int("scenes", 1);
    if (scenes < 1) throw ConfigError("sweep: scenes must be >= 1");

    // Cells: defaults from run.*, overridden by space-separated key=value
    // tokens in each cell.<k> entry.
    std::vector<SweepCell> cells;
    for (int k = 1;; ++k) {
      const std::string key = "cell." + std::to_string(k);
      if (!grid.has(key)) break;
      config::KeyValue merged;
      for (const auto& [gk, gv] : grid.entries()) {
        if (gk.rfind("run.", 0) == 0) merged.set(gk.substr(4), gv);
      }
      std::istringstream is(grid.require_str(key));
      std::string token;
      while (is >> token) {
        size_t eq = token.find('=');
        if (eq == std::string::npos) {
          throw ConfigError("sweep: bad cell token '" + token + "'");
        }
        merged.set(token.substr(0, eq), token.substr(eq + 1));
      }
      SweepCell cell;
      cell.name = key;
      cell.cfg = config::enhance_config_from(merged);
      cells.push_back(std::move(cell));
    }
    if (cells.empty()) throw ConfigError("sweep: no cells defined");

    const uint64_t base_seed = grid.get_u64("scene.seed", 0);
    for (SweepCell& cell : cells) {
      try {
        for (int s = 0; s < scenes; ++s) {
          config::KeyValue scene_kv;
          for (const auto& [gk, gv] : grid.entries()) {
            if (gk.rfind("scene.", 0) == 0) scene_kv.set(gk.substr(6), gv);
          }
          scene_kv.set("seed", std::to_string(base_seed + s));
          sim::SceneSpec spec = config::scene_spec_from(scene_kv);
          sim::SceneTruth scene = sim::gen_scene(spec);

          CTensor x = spectral::stft(scene.mixture, cell.cfg.stft);
          RTensor masks;
          const RTensor* mask_ptr = nullptr;
          if (cell.cfg.run.init == optimizer::InitScheme::kSpatiallyGuided) {
            masks = atf_init::oracle_masks(scene, cell.cfg.stft, 0);
            mask_ptr = &masks;
          }
          optimizer::RunResult res = run_enhancement(x, cell.cfg, mask_ptr);

          std::vector<Eigen::VectorXd> ests, refs;
          for (int n = 0; n < cell.cfg.run.num_sources; ++n) {
            CTensor one(1, res.outputs.frames(), res.outputs.bins());
            for (int f = 0; f < res.outputs.bins(); ++f) {
              for (int t = 0; t < res.outputs.frames(); ++t) {
                one(0, t, f) = res.outputs(n, t, f);
              }
            }
            Waveform est = spectral::istft(one, cell.cfg.stft,
                                           scene.mixture.num_samples(),
                                           spec.sample_rate);
            ests.push_back(est.samples.row(0));
          }
          for (int n = 0; n < spec.num_sources; ++n) {
            refs.push_back(scene.desired[n].samples.row(0));
          }
          Eigen::VectorXd mix_ref = scene.mixture.samples.row(0);
          std::vector<EvalRow> rows =
              evaluate_signals(ests, refs, mix_ref, spec.sample_rate);
          double mf = 0.0, mi = 0.0;
          for (const EvalRow& r : rows) {
            mf += r.fwssnr;
            mi += r.sir_improvement;
          }
          cell.fwssnr.push_back(mf / rows.size());
          cell.sir_improvement.push_back(mi / rows.size());
        }
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
        std::cerr << cell.name << " failed: " << e.what() << '\n';
      }
    }

    std::ostringstream csv;
    csv << "cell,method,I,J,init,switching_model,scenes,fwssnr_mean,fwssnr_std,"
           "sir_improvement_mean,sir_improvement_std,status\n";
    for (const SweepCell& cell : cells) {
      config::KeyValue echo = config::enhance_config_to(cell.cfg);
      csv << cell.name << ',' << echo.get_str("method", "?") << ','
          << cell.cfg.run.mclp_states << ',' << cell.cfg.run.sep_states << ','
          << echo.get_str("init", "?") << ','
          << echo.get_str("switching_model", "?") << ',' << scenes << ',';
      if (cell.failed) {
        csv << ",,,,failed\n";
      } else {
        csv << fmt(mean_of(cell.fwssnr)) << ',' << fmt(std_of(cell.fwssnr)) << ','
            << fmt(mean_of(cell.sir_improvement)) << ','
            << fmt(std_of(cell.sir_improvement)) << ",ok\n";
      }
    }
    write_text(out_csv, csv.str());
    std::cout << csv.str();

    // Trend assertions: "assert.<k> = cell.<a> > cell.<b>" on mean FWSSNR.
    bool all_pass = true;
    for (int k = 1;; ++k) {
      const std::string key = "assert." + std::to_string(k);
      if (!grid.has(key)) break;
      std::istringstream is(grid.require_str(key));
      std::string lhs, op, rhs;
      is >> lhs >> op >> rhs;
      if (op != ">") throw ConfigError("sweep: only '>' assertions supported");
      auto find = [&](const std::string& name) -> const SweepCell& {
        for (const SweepCell& c : cells) {
          if (c.name == name) return c;
        }
        throw ConfigError("sweep: unknown cell in assertion: " + name);
      };
      const SweepCell& a = find(lhs);
      const SweepCell& b = find(rhs);
      bool pass = !a.failed && !b.failed && mean_of(a.fwssnr) > mean_of(b.fwssnr);
      std::cout << key << ' ' << (pass ? "PASS" : "FAIL") << " (" << lhs << ' '
                << fmt(mean_of(a.fwssnr)) << " vs " << rhs << ' '
                << fmt(mean_of(b.fwssnr)) << ")\n";
      all_pass = all_pass && pass;
    }
    return all_pass ? kExitOk : kExitAssert;
  });
}

}  // namespace swbss::cli
