#pragma once

#include "svgen/audio/mel.hpp"

namespace svgen {

// Preview synthesis: denormalize the mel features, invert the filterbank by
// per-frame nonnegative least squares, then reconstruct phase iteratively.
AudioClip griffin_lim(const MelSpec& mel, int iters = 60);

// Per-frame NNLS inversion of the mel filterbank: returns a (1025 x T) linear
// power spectrogram with A*x ~= y, x >= 0. Active-set selection is done on
// norm-scaled columns, which concentrates each band's energy near the bins
// that best explain the neighbouring bands jointly.
Mat64 mel_power_to_linear_power(const Mat64& mel_power);

} // namespace svgen
