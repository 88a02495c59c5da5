// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/wav.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "swbss/errors.hpp"

namespace swbss {

namespace {

void put_u32(std::ostream& os, uint32_t v) {
  char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
               static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
  os.write(b, 4);
}

void put_u16(std::ostream& os, uint16_t v) {
  char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return b[0] | (b[1] << 8) | (b[2] << 16) | (uint32_t(b[3]) << 24);
}

uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  is.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

}  // namespace

void write_wav(const std::string& path, const Waveform& w, WavFormat fmt) {
  if (w.channels() == 0 || w.num_samples() == 0) throw ConfigError("write_wav: empty waveform");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("write_wav: cannot open " + path);

  const uint16_t channels = static_cast<uint16_t>(w.channels());
  const uint32_t rate = static_cast<uint32_t>(w.sample_rate);
  const uint16_t bytes_per_sample = fmt == WavFormat::kPcm16 ? 2 : 4;
  const uint16_t block_align = static_cast<uint16_t>(channels * bytes_per_sample);
  const uint32_t num_frames = static_cast<uint32_t>(w.num_samples());
  const uint32_t data_bytes = num_frames * block_align;
  const bool is_float = fmt == WavFormat::kFloat32;
  const uint32_t fact_bytes = is_float ? 12 : 0;

  os.write("RIFF", 4);
  put_u32(os, 4 + 24 + fact_bytes + 8 + data_bytes);
  os.write("WAVE", 4);

  os.write("fmt ", 4);
  put_u32(os, 16);
  put_u16(os, is_float ? 3 : 1);
  put_u16(os, channels);
  put_u32(os, rate);
  put_u32(os, rate * block_align);
  put_u16(os, block_align);
  put_u16(os, static_cast<uint16_t>(bytes_per_sample * 8));

  if (is_float) {
    os.write("fact", 4);
    put_u32(os, 4);
    put_u32(os, num_frames);
  }

  os.write("data", 4);
  put_u32(os, data_bytes);
  for (uint32_t s = 0; s < num_frames; ++s) {
    for (int m = 0; m < channels; ++m) {
      double v = w.samples(m, s);
      if (is_float) {
        float f = static_cast<float>(v);
        char b[4];
        std::memcpy(b, &f, 4);
        os.write(b, 4);
      } else {
        double clipped = std::clamp(v, -1.0, 1.0);
        int16_t q = static_cast<int16_t>(std::lround(clipped * 32767.0));
        put_u16(os, static_cast<uint16_t>(q));
      }
    }
  }
  if (!os) throw ConfigError("write_wav: write failed for " + path);
}

Waveform read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("read_wav: cannot open " + path);

  char tag[4];
  is.read(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0) throw ConfigError("read_wav: not a RIFF file: " + path);
  get_u32(is);
  is.read(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0) throw ConfigError("read_wav: not a WAVE file: " + path);

  uint16_t audio_format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  std::vector<char> data;

  while (is.read(tag, 4)) {
    uint32_t size = get_u32(is);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      audio_format = get_u16(is);
      channels = get_u16(is);
      rate = get_u32(is);
      get_u32(is);
      get_u16(is);
      bits = get_u16(is);
      if (size > 16) is.seekg(size - 16, std::ios::cur);
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data.resize(size);
      is.read(data.data(), size);
      break;
    } else {
      is.seekg(size + (size & 1), std::ios::cur);
    }
  }

  if (channels == 0 || rate == 0) throw ConfigError("read_wav: missing fmt chunk: " + path);
  const bool pcm16 = audio_format == 1 && bits == 16;
  const bool f32 = audio_format == 3 && bits == 32;
  if (!pcm16 && !f32) throw ConfigError("read_wav: unsupported format in " + path);

  const int bytes_per_sample = pcm16 ? 2 : 4;
  const size_t frames = data.size() / (static_cast<size_t>(channels) * bytes_per_sample);

  Waveform w;
  w.sample_rate = rate;
  w.samples = Eigen::MatrixXd(channels, frames);
  const char* p = data.data();
  for (size_t s = 0; s < frames; ++s) {
    for (int m = 0; m < channels; ++m) {
      if (pcm16) {
        int16_t q;
        std::memcpy(&q, p, 2);
        p += 2;
        w.samples(m, s) = q / 32767.0;
      } else {
        float f;
        std::memcpy(&f, p, 4);
        p += 4;
        w.samples(m, s) = f;
      }
    }
  }
  return w;
}

}  // namespace swbss
