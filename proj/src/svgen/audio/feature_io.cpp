#include "svgen/audio/feature_io.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "svgen/core/crc32.hpp"

namespace svgen {

namespace {

void append_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t take_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) | (static_cast<uint32_t>(p[2]) << 16) |
           (static_cast<uint32_t>(p[3]) << 24);
}

template <typename Real>
void write_impl(const std::string& path, const Mat<Real>& m, uint8_t dtype) {
    std::vector<uint8_t> buf;
    buf.insert(buf.end(), {'F', 'T', 'N', 'S'});
    append_u32(buf, kFeatureVersion);
    buf.push_back(dtype);
    append_u32(buf, static_cast<uint32_t>(m.rows));
    append_u32(buf, static_cast<uint32_t>(m.cols));
    const size_t payload = m.data.size() * sizeof(Real);
    const size_t head = buf.size();
    buf.resize(head + payload);
    std::memcpy(buf.data() + head, m.data.data(), payload);
    append_u32(buf, crc32(buf.data(), buf.size()));

    std::ofstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot create feature file: " + path);
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!f) throw data_error("failed writing feature file: " + path);
}

} // namespace

void write_feature(const std::string& path, const Mat32& m) { write_impl(path, m, 0); }
void write_feature(const std::string& path, const Mat64& m) { write_impl(path, m, 1); }

Mat32 read_feature_f32(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot open feature file: " + path);
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 21 || std::memcmp(buf.data(), "FTNS", 4) != 0) throw data_error("not a feature file: " + path);
    const uint32_t stored_crc = take_u32(buf.data() + buf.size() - 4);
    if (crc32(buf.data(), buf.size() - 4) != stored_crc) throw data_error("feature file checksum mismatch: " + path);
    const uint32_t version = take_u32(buf.data() + 4);
    if (version != kFeatureVersion) throw data_error("unsupported feature file version: " + path);
    const uint8_t dtype = buf[8];
    const uint32_t rows = take_u32(buf.data() + 9);
    const uint32_t cols = take_u32(buf.data() + 13);
    const size_t count = static_cast<size_t>(rows) * cols;
    const size_t elem = (dtype == 0) ? 4 : 8;
    if (buf.size() != 21 + count * elem) throw data_error("feature file size mismatch: " + path);

    Mat32 m(static_cast<int>(rows), static_cast<int>(cols));
    if (dtype == 0) {
        std::memcpy(m.data.data(), buf.data() + 17, count * 4);
    } else if (dtype == 1) {
        for (size_t i = 0; i < count; ++i) {
            double v;
            std::memcpy(&v, buf.data() + 17 + i * 8, 8);
            m.data[i] = static_cast<float>(v);
        }
    } else {
        throw data_error("unknown feature dtype: " + path);
    }
    return m;
}

} // namespace svgen
