// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "swbss/errors.hpp"

namespace swbss::config {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValue KeyValue::parse(const std::string& text) {
  KeyValue kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: missing '=' on line " + std::to_string(lineno));
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config: empty key on line " + std::to_string(lineno));
    }
    kv.kv_[key] = value;
  }
  return kv;
}

KeyValue KeyValue::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

std::string KeyValue::serialize() const {
  std::ostringstream os;
  for (const auto& [k, v] : kv_) os << k << " = " << v << '\n';
  return os.str();
}

std::string KeyValue::get_str(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

std::string KeyValue::require_str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("config: missing required key '" + key + "'");
  return it->second;
}

int KeyValue::get_int(const std::string& key, int fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    size_t pos = 0;
    int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + it->second);
  }
}

double KeyValue::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& s = it->second;
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for '" + key + "': " + s);
  }
}

bool KeyValue::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& s = it->second;
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config: bad boolean for '" + key + "': " + s);
}

uint64_t KeyValue::get_u64(const std::string& key, uint64_t fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    size_t pos = 0;
    uint64_t v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad seed for '" + key + "': " + it->second);
  }
}

sim::SceneSpec scene_spec_from(const KeyValue& kv, const std::string& prefix) {
  sim::SceneSpec spec;
  spec.num_sources = kv.get_int(prefix + "sources", spec.num_sources);
  spec.num_mics = kv.get_int(prefix + "mics", spec.num_mics);
  spec.duration_s = kv.get_double(prefix + "duration_s", spec.duration_s);
  spec.rt60_s = kv.get_double(prefix + "rt60_s", spec.rt60_s);
  spec.snr_db = kv.get_double(prefix + "snr_db", spec.snr_db);
  spec.direct_to_early_ms =
      kv.get_double(prefix + "direct_to_early_ms", spec.direct_to_early_ms);
  spec.sample_rate = kv.get_double(prefix + "sample_rate", spec.sample_rate);
  spec.seed = kv.get_u64(prefix + "seed", spec.seed);
  spec.validate();
  return spec;
}

KeyValue scene_spec_to(const sim::SceneSpec& spec) {
  KeyValue kv;
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(15);
    if (std::isinf(v)) {
      os << "inf";
    } else {
      os << v;
    }
    return os.str();
  };
  kv.set("sources", std::to_string(spec.num_sources));
  kv.set("mics", std::to_string(spec.num_mics));
  kv.set("duration_s", num(spec.duration_s));
  kv.set("rt60_s", num(spec.rt60_s));
  kv.set("snr_db", num(spec.snr_db));
  kv.set("direct_to_early_ms", num(spec.direct_to_early_ms));
  kv.set("sample_rate", num(spec.sample_rate));
  kv.set("seed", std::to_string(spec.seed));
  return kv;
}

EnhanceConfig enhance_config_from(const KeyValue& kv, const std::string& prefix) {
  using optimizer::InitScheme;
  using optimizer::Mode;
  using optimizer::SwitchingModel;

  EnhanceConfig cfg;
  optimizer::RunConfig& run = cfg.run;

  const std::string method = kv.get_str(prefix + "method", "swciva");
  if (method == "iva") {
    run.mode = Mode::kSwIva;
    run.sep_states = 1;
  } else if (method == "swiva") {
    run.mode = Mode::kSwIva;
    run.sep_states = kv.get_int(prefix + "J", 2);
  } else if (method == "civa") {
    run.mode = Mode::kSwCiva;
    run.mclp_states = 1;
    run.sep_states = 1;
  } else if (method == "swciva") {
    run.mode = Mode::kSwCiva;
    run.mclp_states = kv.get_int(prefix + "I", 2);
    run.sep_states = kv.get_int(prefix + "J", 2);
  } else {
    throw ConfigError("config: unknown method '" + method + "'");
  }
  if (method == "iva" || method == "civa") {
    // Aliases pin the state counts; reject contradictions instead of
    // silently ignoring them.
    if (kv.get_int(prefix + "I", 1) != 1 || kv.get_int(prefix + "J", 1) != 1) {
      throw ConfigError("config: method '" + method + "' fixes I = J = 1");
    }
  }

  run.num_sources = kv.get_int(prefix + "N", run.num_sources);
  run.sweeps_per_round = kv.get_int(prefix + "K", run.sweeps_per_round);
  run.total_w_updates = kv.get_int(prefix + "total_w_updates", run.total_w_updates);
  run.prediction_delay = kv.get_int(prefix + "D", run.prediction_delay);
  run.filter_span = kv.get_int(prefix + "L", run.filter_span);
  run.single_state_w_updates =
      kv.get_int(prefix + "single_state_w_updates", run.single_state_w_updates);
  run.ref_channel = kv.get_int(prefix + "ref_channel", run.ref_channel);
  run.seed = kv.get_u64(prefix + "seed", run.seed);
  run.eps_rel = kv.get_double(prefix + "eps_rel", run.eps_rel);
  run.coarse_fine = kv.get_bool(prefix + "coarse_fine", run.coarse_fine);
  run.early_stop = kv.get_bool(prefix + "early_stop", run.early_stop);
  run.early_stop_rel = kv.get_double(prefix + "early_stop_rel", run.early_stop_rel);
  run.loading.relative_floor =
      kv.get_double(prefix + "loading_floor", run.loading.relative_floor);

  const std::string init = kv.get_str(prefix + "init", "simple");
  if (init == "simple") {
    run.init = InitScheme::kSimple;
  } else if (init == "single_state") {
    run.init = InitScheme::kSingleState;
  } else if (init == "spatially_guided") {
    run.init = InitScheme::kSpatiallyGuided;
  } else {
    throw ConfigError("config: unknown init '" + init + "'");
  }

  const std::string model = kv.get_str(prefix + "switching_model", "factorized");
  if (model == "factorized") {
    run.switching_model = SwitchingModel::kFactorized;
  } else if (model == "direct") {
    run.switching_model = SwitchingModel::kDirect;
    run.mclp_states = run.sep_states;
  } else {
    throw ConfigError("config: unknown switching_model '" + model + "'");
  }

  const std::string trace = kv.get_str(prefix + "trace", "light");
  if (trace == "light") {
    run.trace = optimizer::RunConfig::Trace::kLight;
  } else if (trace == "full") {
    run.trace = optimizer::RunConfig::Trace::kFull;
  } else {
    throw ConfigError("config: unknown trace level '" + trace + "'");
  }

  cfg.stft.frame_len = kv.get_int(prefix + "stft.frame_len", cfg.stft.frame_len);
  cfg.stft.hop = kv.get_int(prefix + "stft.hop", cfg.stft.hop);
  cfg.stft.window = kv.get_str(prefix + "stft.window", cfg.stft.window);
  cfg.stft.validate();

  cfg.mask_path = kv.get_str(prefix + "masks", "");

  if (run.mode == Mode::kSwIva) run.mclp_states = 1;
  run.validate();
  return cfg;
}

KeyValue enhance_config_to(const EnhanceConfig& cfg) {
  using optimizer::InitScheme;
  using optimizer::Mode;
  using optimizer::SwitchingModel;
  KeyValue kv;
  const optimizer::RunConfig& run = cfg.run;

  std::string method;
  if (run.mode == Mode::kSwIva) {
    method = run.sep_states == 1 ? "iva" : "swiva";
  } else {
    method = run.mclp_states == 1 && run.sep_states == 1 ? "civa" : "swciva";
  }
  kv.set("method", method);
  if (method == "swiva" || method == "swciva") {
    kv.set("J", std::to_string(run.sep_states));
  }
  if (method == "swciva") kv.set("I", std::to_string(run.mclp_states));

  kv.set("N", std::to_string(run.num_sources));
  kv.set("K", std::to_string(run.sweeps_per_round));
  kv.set("total_w_updates", std::to_string(run.total_w_updates));
  kv.set("D", std::to_string(run.prediction_delay));
  kv.set("L", std::to_string(run.filter_span));
  kv.set("single_state_w_updates", std::to_string(run.single_state_w_updates));
  kv.set("ref_channel", std::to_string(run.ref_channel));
  kv.set("seed", std::to_string(run.seed));
  kv.set("coarse_fine", run.coarse_fine ? "true" : "false");
  kv.set("init", run.init == InitScheme::kSimple          ? "simple"
                 : run.init == InitScheme::kSingleState   ? "single_state"
                                                          : "spatially_guided");
  kv.set("switching_model",
         run.switching_model == SwitchingModel::kFactorized ? "factorized" : "direct");
  kv.set("trace", run.trace == optimizer::RunConfig::Trace::kFull ? "full" : "light");
  kv.set("stft.frame_len", std::to_string(cfg.stft.frame_len));
  kv.set("stft.hop", std::to_string(cfg.stft.hop));
  kv.set("stft.window", cfg.stft.window);
  if (!cfg.mask_path.empty()) kv.set("masks", cfg.mask_path);
  return kv;
}

}  // namespace swbss::config
