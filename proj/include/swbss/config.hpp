// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <map>
#include <optional>
#include <string>

#include "swbss/optimizer.hpp"
#include "swbss/simulator.hpp"
#include "swbss/spectral.hpp"

namespace swbss::config {

// Flat key=value text with '#' comments and dotted section prefixes.
class KeyValue {
 public:
  static KeyValue parse(const std::string& text);
  static KeyValue parse_file(const std::string& path);

  // Canonical serialization: sorted keys, one per line.
  std::string serialize() const;

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  std::string get_str(const std::string& key, const std::string& fallback) const;
  std::string require_str(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

// Scene keys live under no prefix (sources, mics, duration_s, ...).
sim::SceneSpec scene_spec_from(const KeyValue& kv, const std::string& prefix = "");
KeyValue scene_spec_to(const sim::SceneSpec& spec);

// Enhancement run keys: method, I, J, K, total_w_updates, D, L, init,
// switching_model, seed, N, and the stft.* block.
struct EnhanceConfig {
  optimizer::RunConfig run;
  spectral::StftConfig stft;
  std::string mask_path;  // optional; required by spatially guided init
};

EnhanceConfig enhance_config_from(const KeyValue& kv, const std::string& prefix = "");
KeyValue enhance_config_to(const EnhanceConfig& cfg);

}  // namespace swbss::config
