#pragma once

#include <string>
#include <vector>

#include "svgen/chord/vocab.hpp"
#include "svgen/core/mat.hpp"

namespace svgen {

// Pinned generation-condition vocabularies: 12 major + 12 minor keys,
// 10 tempo options from 60 to 240 BPM, 6 time signatures whose beat counts
// divide the 12 sub-beat positions per bar.
constexpr int kCondDim = 40; // 24 key + 10 tempo + 6 time signature
constexpr int kBeatPositions = 12;

const std::vector<int>& tempo_options();                  // {60, 80, ..., 240}
const std::vector<std::pair<int, int>>& time_signatures(); // {2/4, 3/4, 4/4, 2/2, 6/8, 12/8}

int tempo_bucket(double bpm);          // nearest option, ties toward the slower one
int time_signature_index(int num, int den);
int beats_per_bar(int ts_index);

// Symbolic lead sheet: per-beat chord tokens and per-beat melody pitches
// (MIDI note number, 0 = rest), with key / tempo / time-signature metadata.
struct LeadSheet {
    int key_root = 0;      // 0..11
    bool minor = false;
    double tempo_bpm = 120.0;
    int ts_index = 2;      // into time_signatures()
    std::vector<int> chords; // chord tokens, one per beat
    std::vector<int> melody; // MIDI pitch per beat, 0 = rest
};

// JSON schema:
// {"sheets": [{"key_root":0, "key_mode":"major", "tempo":120,
//              "time_sig":"4/4", "chords":[...], "melody":[...]}]}
std::vector<LeadSheet> load_lead_sheets(const std::string& path);
void save_lead_sheets(const std::string& path, const std::vector<LeadSheet>& sheets);

// 40-dim one-hot condition vector (24 key + 10 tempo + 6 time signature).
Mat32 gen_condition(int key_root, bool minor, double bpm, int ts_index);
Mat32 gen_condition(const LeadSheet& sheet);

// All 12 key rotations of every sheet (rotation 0 is the sheet itself).
std::vector<LeadSheet> augment_rotate_keys(const std::vector<LeadSheet>& sheets);

// Beat-position one-hot index for a beat counter under a time signature.
int beat_position(int beat_index, int ts_index);

// One-hot melody chroma per beat (12 x n), all-zero on rests.
Mat32 melody_chroma(const std::vector<int>& melody);

} // namespace svgen
