#pragma once

#include <vector>

#include "svgen/core/rng.hpp"
#include "svgen/train/trainer.hpp"

namespace svgen::testing {

// Seeded pseudo-singing mel patterns: a smooth random-walk pitch contour
// rendered as a Gaussian band bump plus a weaker harmonic, in [-1, 1].
inline Mat32 toy_mel_clip(Rng& rng, int T, int mel_bins = 80) {
    Mat32 mel = Mat32::filled(mel_bins, T, -1.0f);
    double center = 12.0 + rng.uniform01() * 40.0;
    for (int t = 0; t < T; ++t) {
        center += rng.normal() * 0.8;
        center = std::clamp(center, 6.0, mel_bins - 20.0);
        for (int m = 0; m < mel_bins; ++m) {
            const double d0 = (m - center) / 2.0;
            const double d1 = (m - center - 14.0) / 2.5;
            const double v = -1.0 + 1.9 * std::exp(-0.5 * d0 * d0) + 0.9 * std::exp(-0.5 * d1 * d1);
            mel(m, t) = static_cast<float>(std::clamp(v, -1.0, 1.0));
        }
    }
    return mel;
}

inline std::vector<ClipData> toy_corpus(int n_clips, int T, uint64_t seed, CondMode mode = CondMode::kFree) {
    Rng rng(seed);
    std::vector<ClipData> clips;
    for (int i = 0; i < n_clips; ++i) {
        ClipData c;
        c.mel = toy_mel_clip(rng, T);
        if (mode == CondMode::kPianoRoll) {
            Mat32 roll(88, T);
            for (int t = 0; t < T; ++t) roll(30 + (i % 20), t) = 1.0f;
            c.cond = std::move(roll);
        } else if (mode == CondMode::kChord) {
            Mat32 cond(24, T);
            for (int t = 0; t < T; ++t) {
                cond(i % 12, t) = 1.0f;
                cond(12 + i % 12, t) = 1.0f;
            }
            c.cond = std::move(cond);
        }
        clips.push_back(std::move(c));
    }
    return clips;
}

} // namespace svgen::testing
