#pragma once

#include <cstddef>
#include <cstdint>

namespace svgen {

// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
uint32_t crc32(const void* data, size_t len, uint32_t seed = 0);

} // namespace svgen
