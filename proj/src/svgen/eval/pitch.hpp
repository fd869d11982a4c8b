#pragma once

#include <vector>

#include "svgen/audio/wav.hpp"

namespace svgen {

// Human vocal pitch range; estimates outside it are zeroed.
constexpr double kPitchMinHz = 73.0;
constexpr double kPitchMaxHz = 988.0;
constexpr double kSilenceRms = 1e-3; // -60 dBFS

struct PitchTrack {
    std::vector<double> pitch_hz;   // 0 means unvoiced
    std::vector<double> confidence; // 1 - min cumulative-mean-normalized difference
    std::vector<double> activation; // energy-gated voicing score in [0, 1]

    size_t frames() const { return pitch_hz.size(); }
};

// Frame-wise YIN: normalized-autocorrelation pitch at hop 512 with a 1024-
// sample integration window, parabolic lag interpolation, then the vocal
// range clamp.
PitchTrack track_pitch(const AudioClip& clip);

// Per-frame RMS gate at -60 dBFS, same framing as the tracker.
std::vector<bool> nonsilent_frames(const AudioClip& clip);

} // namespace svgen
