#pragma once

#include <string>
#include <vector>

#include "svgen/core/errors.hpp"

namespace svgen {

constexpr int kSampleRate = 22050; // pipeline rate after ingestion

struct AudioClip {
    std::vector<float> samples; // mono, [-1, 1]
    int sample_rate = kSampleRate;

    double seconds() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// Reads PCM 16-bit or IEEE float32 WAV; multi-channel input is downmixed by
// averaging. Throws data_error on anything else.
AudioClip read_wav(const std::string& path);

// Writes mono PCM 16-bit.
void write_wav(const std::string& path, const AudioClip& clip);

} // namespace svgen
