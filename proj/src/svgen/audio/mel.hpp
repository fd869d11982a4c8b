#pragma once

#include <vector>

#include "svgen/audio/stft.hpp"
#include "svgen/core/mat.hpp"

namespace svgen {

constexpr int kMelBins = 80;
constexpr double kFMin = 0.0;
constexpr double kFMax = 11025.0;
constexpr double kLogFloorPower = 1e-5; // log-mel = log(1e-5 + power)

// Silence maps to exactly this log-mel value.
inline double log_mel_floor() { return std::log(kLogFloorPower); }

// Slaney-scale triangular filterbank (80 x 1025), area-normalized per band.
const Mat64& mel_filterbank();

// Center frequency (Hz) of each mel band.
std::vector<double> mel_band_centers();

struct MelNorm {
    double cmin = 0.0; // corpus min of log-mel
    double cmax = 0.0; // corpus max of log-mel
};

struct MelSpec {
    Mat32 values; // 80 x T, normalized to [-1, 1]
    MelNorm norm;

    int frames() const { return values.cols; }
};

// log(1e-5 + mel power) of one clip, 80 x T with T = ceil(n_samples / hop).
// The clip must already be at kSampleRate.
Mat64 log_mel_spectrogram(const AudioClip& clip);

// Min-max normalization of log-mel into [-1, 1] using corpus statistics.
// A degenerate range (cmax <= cmin) maps everything to the floor (-1).
Mat32 normalize_log_mel(const Mat64& logmel, const MelNorm& norm);
Mat64 denormalize_log_mel(const MelSpec& spec);

// Convenience: normalize a single clip by its own min/max.
MelSpec melspec(const AudioClip& clip);

// A frame is energy-active when its mean denormalized log-mel exceeds the
// silence floor by `activity_offset` (natural-log units).
constexpr double kDefaultActivityOffset = 2.0;
std::vector<bool> active_frames(const MelSpec& spec, double activity_offset = kDefaultActivityOffset);

// Fixed-length windowing with the vocal-energy filter: consecutive windows of
// floor(clip_seconds * sr / hop) frames; a window is kept when its fraction
// of active frames is >= vocal_ratio_min (strictly-below windows drop); the
// trailing partial window drops.
struct WindowInfo {
    int start = 0;
    int frames = 0;
    bool kept = false;
    double active_fraction = 0.0;
};

std::vector<MelSpec> segment(const MelSpec& track, double clip_seconds, double vocal_ratio_min,
                             double activity_offset = kDefaultActivityOffset,
                             std::vector<WindowInfo>* info = nullptr);

int frames_per_window(double clip_seconds);

} // namespace svgen
