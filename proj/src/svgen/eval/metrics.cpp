#include "svgen/eval/metrics.hpp"

#include <cmath>
#include <fstream>

#include "svgen/audio/stft.hpp"

namespace svgen {

double vocalness(const PitchTrack& track, const std::vector<bool>& nonsilent_mask) {
    if (nonsilent_mask.size() != track.frames()) throw data_error("vocalness: mask length mismatch");
    int nonsilent = 0, vocal = 0;
    for (size_t t = 0; t < track.frames(); ++t) {
        if (!nonsilent_mask[t]) continue;
        ++nonsilent;
        if (track.activation[t] >= 0.5 && track.pitch_hz[t] > 0.0) ++vocal;
    }
    if (nonsilent == 0) throw data_error("vocalness: no non-silent frames");
    return static_cast<double>(vocal) / nonsilent;
}

double average_pitch(const PitchTrack& track) {
    double sum = 0.0;
    int n = 0;
    for (size_t t = 0; t < track.frames(); ++t) {
        if (track.confidence[t] > 0.5 && track.pitch_hz[t] > 0.0) {
            sum += track.pitch_hz[t];
            ++n;
        }
    }
    if (n == 0) throw data_error("average_pitch: no frames with confidence > 0.5");
    return sum / n;
}

std::vector<int> skyline(const Mat32& roll) {
    if (roll.rows != 88) throw data_error("skyline: piano roll must have 88 rows");
    std::vector<int> melody(roll.cols, 0);
    for (int t = 0; t < roll.cols; ++t) {
        for (int r = 87; r >= 0; --r) {
            if (roll(r, t) >= 0.5f) {
                melody[t] = 21 + r;
                break;
            }
        }
    }
    return melody;
}

Mat32 pitch_track_chroma(const PitchTrack& track, int steps, double frames_per_step) {
    Mat32 chroma(12, steps);
    for (int s = 0; s < steps; ++s) {
        const int lo = static_cast<int>(std::floor(s * frames_per_step));
        const int hi = static_cast<int>(std::floor((s + 1) * frames_per_step));
        double counts[12] = {0};
        double total = 0.0;
        for (int t = lo; t < hi && t < static_cast<int>(track.frames()); ++t) {
            if (track.pitch_hz[t] <= 0.0 || track.confidence[t] <= 0.5) continue;
            const double midi = 69.0 + 12.0 * std::log2(track.pitch_hz[t] / 440.0);
            const int pc = ((static_cast<int>(std::lround(midi)) % 12) + 12) % 12;
            counts[pc] += 1.0;
            total += 1.0;
        }
        if (total > 0.0) {
            for (int i = 0; i < 12; ++i) chroma(i, s) = static_cast<float>(counts[i] / total);
        }
    }
    return chroma;
}

double audio_matchness(const AudioClip& voice, const std::vector<int>& chords, const ChordModel& mh, double bpm) {
    if (chords.empty()) throw data_error("audio_matchness: empty chord sequence");
    const double frames_per_step = (60.0 / bpm) * kSampleRate / kHop;
    const PitchTrack track = track_pitch(voice);
    const Mat32 chroma = pitch_track_chroma(track, static_cast<int>(chords.size()), frames_per_step);
    return mh.matchness(chroma, chords);
}

void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows) {
    std::ofstream f(path);
    if (!f) throw data_error("cannot create CSV: " + path);
    f << "clip_id,avg_pitch,vocalness,matchness\n";
    auto cell = [&](const std::optional<double>& v) {
        if (v) f << *v;
    };
    for (const auto& r : rows) {
        f << r.clip_id << ",";
        cell(r.avg_pitch);
        f << ",";
        cell(r.vocalness);
        f << ",";
        cell(r.matchness);
        f << "\n";
    }
}

} // namespace svgen
