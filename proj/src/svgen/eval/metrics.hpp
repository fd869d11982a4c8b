#pragma once

#include <optional>
#include <string>
#include <vector>

#include "svgen/chord/chord_model.hpp"
#include "svgen/eval/pitch.hpp"

namespace svgen {

// Fraction of non-silent frames that are vocal: activation >= 0.5 AND pitch > 0.
// Throws data_error when the mask holds no non-silent frame.
double vocalness(const PitchTrack& track, const std::vector<bool>& nonsilent_mask);

// Mean pitch (Hz) over voiced frames with confidence > 0.5.
// Throws data_error when no frame qualifies.
double average_pitch(const PitchTrack& track);

// Highest active MIDI pitch per frame of an 88 x T piano roll (rows are MIDI
// 21..108); 0 marks a rest.
std::vector<int> skyline(const Mat32& roll);

// Quarter-note melody chroma from a pitch track: voiced, confident frames are
// histogrammed by pitch class per window and each column normalized to sum 1
// (all-zero when a window holds no voiced frame). frames_per_step comes from
// the tempo: (60 / bpm) * sr / hop.
Mat32 pitch_track_chroma(const PitchTrack& track, int steps, double frames_per_step);

// Matchness of a sung clip against a chord progression stepped at quarter
// notes: pitch-track the voice, window it into per-step chroma, then score
// under the melody-harmonization model.
double audio_matchness(const AudioClip& voice, const std::vector<int>& chords, const ChordModel& mh,
                       double bpm = 120.0);

// One evaluation row; missing values render as empty CSV cells.
struct EvalRow {
    std::string clip_id;
    std::optional<double> avg_pitch;
    std::optional<double> vocalness;
    std::optional<double> matchness;
};

// CSV with the header clip_id,avg_pitch,vocalness,matchness.
void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows);

} // namespace svgen
