#pragma once

#include <string>

#include "svgen/core/mat.hpp"

namespace svgen {

// Feature container, little-endian:
//   magic "FTNS" | version u32 | dtype u8 (0 = f32, 1 = f64) | rows u32 |
//   cols u32 | row-major payload | crc32 u32 over all preceding bytes
//
// Mel features are stored as f32 (80 x T); piano rolls use the same container
// with rows = 88 and {0,1} entries.
constexpr uint32_t kFeatureVersion = 1;

void write_feature(const std::string& path, const Mat32& m);
void write_feature(const std::string& path, const Mat64& m);

Mat32 read_feature_f32(const std::string& path);

} // namespace svgen
