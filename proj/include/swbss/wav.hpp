// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>

#include "swbss/tensor.hpp"

namespace swbss {

enum class WavFormat { kPcm16, kFloat32 };

// Little-endian RIFF writer; channels interleaved.
void write_wav(const std::string& path, const Waveform& w,
               WavFormat fmt = WavFormat::kFloat32);

// Reads 16-bit PCM or 32-bit float RIFF files; unknown chunks are skipped.
Waveform read_wav(const std::string& path);

}  // namespace swbss
