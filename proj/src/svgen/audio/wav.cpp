#include "svgen/audio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace svgen {

namespace {

uint32_t rd_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) | (static_cast<uint32_t>(p[2]) << 16) |
           (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t rd_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

void wr_u32(std::ofstream& f, uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v >> 16),
                    static_cast<uint8_t>(v >> 24)};
    f.write(reinterpret_cast<const char*>(b), 4);
}
void wr_u16(std::ofstream& f, uint16_t v) {
    uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
    f.write(reinterpret_cast<const char*>(b), 2);
}

} // namespace

AudioClip read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot open WAV file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw data_error("not a RIFF/WAVE file: " + path);
    }

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    const uint8_t* data = nullptr;
    size_t data_len = 0;

    size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const uint32_t chunk_len = rd_u32(bytes.data() + pos + 4);
        const uint8_t* body = bytes.data() + pos + 8;
        if (pos + 8 + chunk_len > bytes.size()) throw data_error("truncated WAV chunk: " + path);
        if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
            if (chunk_len < 16) throw data_error("bad fmt chunk: " + path);
            format = rd_u16(body);
            channels = rd_u16(body + 2);
            sample_rate = rd_u32(body + 4);
            bits = rd_u16(body + 14);
        } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
            data = body;
            data_len = chunk_len;
        }
        pos += 8 + chunk_len + (chunk_len & 1);
    }
    if (!data || channels == 0 || sample_rate == 0) throw data_error("missing fmt/data chunk: " + path);

    const bool pcm16 = (format == 1 && bits == 16);
    const bool f32 = (format == 3 && bits == 32);
    if (!pcm16 && !f32) throw data_error("unsupported WAV encoding (PCM16 or float32 only): " + path);

    const size_t bytes_per_sample = pcm16 ? 2 : 4;
    const size_t frame_bytes = bytes_per_sample * channels;
    const size_t frames = data_len / frame_bytes;

    AudioClip clip;
    clip.sample_rate = static_cast<int>(sample_rate);
    clip.samples.resize(frames);
    for (size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (int ch = 0; ch < channels; ++ch) {
            const uint8_t* p = data + i * frame_bytes + ch * bytes_per_sample;
            if (pcm16) {
                int16_t v;
                std::memcpy(&v, p, 2);
                acc += static_cast<double>(v) / 32768.0;
            } else {
                float v;
                std::memcpy(&v, p, 4);
                acc += static_cast<double>(v);
            }
        }
        clip.samples[i] = static_cast<float>(acc / channels);
    }
    return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot create WAV file: " + path);
    const uint32_t n = static_cast<uint32_t>(clip.samples.size());
    f.write("RIFF", 4);
    wr_u32(f, 36 + n * 2);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    wr_u32(f, 16);
    wr_u16(f, 1); // PCM
    wr_u16(f, 1); // mono
    wr_u32(f, static_cast<uint32_t>(clip.sample_rate));
    wr_u32(f, static_cast<uint32_t>(clip.sample_rate * 2));
    wr_u16(f, 2);
    wr_u16(f, 16);
    f.write("data", 4);
    wr_u32(f, n * 2);
    for (float s : clip.samples) {
        const float c = std::clamp(s, -1.0f, 1.0f);
        const int16_t v = static_cast<int16_t>(std::lround(c * 32767.0f));
        f.write(reinterpret_cast<const char*>(&v), 2);
    }
    if (!f) throw data_error("failed writing WAV file: " + path);
}

} // namespace svgen
