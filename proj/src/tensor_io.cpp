// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/tensor_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "swbss/errors.hpp"

namespace swbss {

namespace {

constexpr char kMagic[5] = {'S', 'W', 'B', 'T', '1'};
constexpr uint8_t kComplex64 = 0;
constexpr uint8_t kReal32 = 1;

void put_u32(std::ostream& os, uint32_t v) {
  char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
               static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
  os.write(b, 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return b[0] | (b[1] << 8) | (b[2] << 16) | (uint32_t(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) {
  char b[4];
  std::memcpy(b, &v, 4);
  os.write(b, 4);
}

float get_f32(std::istream& is) {
  char b[4];
  is.read(b, 4);
  float v;
  std::memcpy(&v, b, 4);
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("tensor write: cannot open " + path);
  return os;
}

void write_header(std::ostream& os, uint8_t dtype, uint32_t d0, uint32_t d1,
                  uint32_t d2) {
  os.write(kMagic, 5);
  os.put(static_cast<char>(dtype));
  put_u32(os, 3);
  put_u32(os, d0);
  put_u32(os, d1);
  put_u32(os, d2);
}

uint8_t read_header(std::istream& is, const std::string& path, uint32_t dims[3]) {
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, kMagic, 5) != 0) {
    throw ConfigError("tensor read: bad magic in " + path);
  }
  uint8_t dtype = static_cast<uint8_t>(is.get());
  uint32_t ndims = get_u32(is);
  if (ndims != 3) throw ConfigError("tensor read: expected 3 dims in " + path);
  for (int k = 0; k < 3; ++k) dims[k] = get_u32(is);
  return dtype;
}

}  // namespace

void write_ctensor(const std::string& path, const CTensor& t) {
  auto os = open_out(path);
  write_header(os, kComplex64, t.rows(), t.frames(), t.bins());
  for (int r = 0; r < t.rows(); ++r) {
    for (int tt = 0; tt < t.frames(); ++tt) {
      for (int f = 0; f < t.bins(); ++f) {
        put_f32(os, static_cast<float>(t(r, tt, f).real()));
        put_f32(os, static_cast<float>(t(r, tt, f).imag()));
      }
    }
  }
  if (!os) throw ConfigError("tensor write: write failed for " + path);
}

void write_rtensor(const std::string& path, const RTensor& t) {
  auto os = open_out(path);
  write_header(os, kReal32, t.rows(), t.frames(), t.bins());
  for (int r = 0; r < t.rows(); ++r) {
    for (int tt = 0; tt < t.frames(); ++tt) {
      for (int f = 0; f < t.bins(); ++f) put_f32(os, static_cast<float>(t(r, tt, f)));
    }
  }
  if (!os) throw ConfigError("tensor write: write failed for " + path);
}

CTensor read_ctensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("tensor read: cannot open " + path);
  uint32_t dims[3];
  if (read_header(is, path, dims) != kComplex64) {
    throw ConfigError("tensor read: expected complex64 payload in " + path);
  }
  CTensor t(dims[0], dims[1], dims[2]);
  for (uint32_t r = 0; r < dims[0]; ++r) {
    for (uint32_t tt = 0; tt < dims[1]; ++tt) {
      for (uint32_t f = 0; f < dims[2]; ++f) {
        float re = get_f32(is);
        float im = get_f32(is);
        t(r, tt, f) = cd(re, im);
      }
    }
  }
  if (!is) throw ConfigError("tensor read: truncated file " + path);
  return t;
}

RTensor read_rtensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("tensor read: cannot open " + path);
  uint32_t dims[3];
  if (read_header(is, path, dims) != kReal32) {
    throw ConfigError("tensor read: expected real32 payload in " + path);
  }
  RTensor t(dims[0], dims[1], dims[2]);
  for (uint32_t r = 0; r < dims[0]; ++r) {
    for (uint32_t tt = 0; tt < dims[1]; ++tt) {
      for (uint32_t f = 0; f < dims[2]; ++f) t(r, tt, f) = get_f32(is);
    }
  }
  if (!is) throw ConfigError("tensor read: truncated file " + path);
  return t;
}

}  // namespace swbss
