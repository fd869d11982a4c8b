#pragma once

#include <optional>
#include <vector>

#include "svgen/core/mat.hpp"
#include "svgen/model/began.hpp"

namespace svgen {

// 88 x T binary piano-roll condition (rows are MIDI 21..108, >= 0.5 is on).
Mat32 piano_roll_condition(const Mat32& roll, int frames);

// Frame-wise 24 x T condition from a beat-stepped chord progression:
// 12 chroma rows plus 12 root one-hot rows, each beat spanning
// (60 / bpm) * sr / hop frames.
Mat32 chord_condition(const std::vector<int>& tokens, double bpm, int frames);

// Frame count covered by a beat-stepped progression at the mel frame rate.
int chord_condition_frames(int steps, double bpm);

// Mode dispatch; absent for the free singer.
std::optional<Mat32> build_condition(CondMode mode, const Mat32* roll, const std::vector<int>* chords, double bpm,
                                     int frames);

} // namespace svgen
