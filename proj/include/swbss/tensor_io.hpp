// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>

#include "swbss/tensor.hpp"

namespace swbss {

// "SWBT1" tensor file: magic (5 bytes), payload type byte (0 = complex64,
// 1 = real32), u32 dim count, u32 dims, then values little-endian in index
// order with the first-listed index slowest. Complex values are stored as
// interleaved float32 pairs.
void write_ctensor(const std::string& path, const CTensor& t);
void write_rtensor(const std::string& path, const RTensor& t);
CTensor read_ctensor(const std::string& path);
RTensor read_rtensor(const std::string& path);

}  // namespace swbss
