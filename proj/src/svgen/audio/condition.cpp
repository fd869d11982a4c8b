#include "svgen/audio/condition.hpp"

#include <cmath>

#include "svgen/audio/stft.hpp"
#include "svgen/chord/vocab.hpp"

namespace svgen {

Mat32 piano_roll_condition(const Mat32& roll, int frames) {
    if (roll.rows != 88) throw data_error("piano roll must have 88 rows");
    if (roll.cols != frames) {
        throw data_error("piano roll frame count " + std::to_string(roll.cols) + " does not match requested " +
                         std::to_string(frames));
    }
    Mat32 out(88, frames);
    for (size_t i = 0; i < roll.data.size(); ++i) out.data[i] = roll.data[i] >= 0.5f ? 1.0f : 0.0f;
    return out;
}

int chord_condition_frames(int steps, double bpm) {
    const double fpb = (60.0 / bpm) * kSampleRate / kHop;
    return static_cast<int>(std::floor(steps * fpb));
}

Mat32 chord_condition(const std::vector<int>& tokens, double bpm, int frames) {
    if (tokens.empty()) throw data_error("chord condition: empty progression");
    const double fpb = (60.0 / bpm) * kSampleRate / kHop;
    if (frames > static_cast<int>(std::ceil(tokens.size() * fpb))) {
        throw data_error("chord condition: progression too short for requested frame count");
    }
    const auto& vocab = ChordVocab::instance();
    Mat32 out(24, frames);
    for (int t = 0; t < frames; ++t) {
        const int step = std::min(static_cast<int>(tokens.size()) - 1, static_cast<int>(std::floor(t / fpb)));
        const auto feat = vocab.chroma_and_root(tokens[step]);
        for (int r = 0; r < 24; ++r) out(r, t) = feat[r];
    }
    return out;
}

std::optional<Mat32> build_condition(CondMode mode, const Mat32* roll, const std::vector<int>* chords, double bpm,
                                     int frames) {
    switch (mode) {
        case CondMode::kFree:
            if (roll || chords) throw data_error("free mode takes no condition");
            return std::nullopt;
        case CondMode::kPianoRoll:
            if (!roll) throw data_error("piano-roll mode needs a piano roll");
            return piano_roll_condition(*roll, frames);
        case CondMode::kChord:
            if (!chords) throw data_error("chord mode needs a chord progression");
            return chord_condition(*chords, bpm, frames);
    }
    throw data_error("unknown condition mode");
}

} // namespace svgen
