#pragma once

#include "svgen/audio/wav.hpp"

namespace svgen {

// Rational-ratio windowed-sinc resampler (polyphase evaluation at the exact
// L/M phase of each output sample, Hann-windowed kernel, 32 zero crossings).
AudioClip resample(const AudioClip& in, int target_rate);

} // namespace svgen
