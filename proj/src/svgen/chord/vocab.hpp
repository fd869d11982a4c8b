#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "svgen/core/errors.hpp"

namespace svgen {

constexpr int kNumRoots = 12;
constexpr int kNumQualities = 51;
constexpr int kChordVocabSize = kNumRoots * kNumQualities; // 612

// Chord token vocabulary: token = root * 51 + quality, decoded to
// (root, quality, chroma bitset). The quality inventory is the versioned
// table in data/chord_qualities.txt; the same table is compiled in so the
// vocabulary needs no runtime files.
class ChordVocab {
public:
    static const ChordVocab& instance();
    static ChordVocab from_table_text(const std::string& text);
    static ChordVocab from_file(const std::string& path);

    int size() const { return kChordVocabSize; }

    int encode(int root, int quality) const;

    struct Decoded {
        int root = 0;
        int quality = 0;
        uint16_t chroma = 0; // bit i set => pitch class i sounds
    };
    Decoded decode(int token) const;

    const std::string& quality_name(int quality) const { return names_.at(quality); }
    uint16_t quality_intervals(int quality) const { return intervals_.at(quality); }

    // 12-dim 0/1 chroma plus 12-dim root one-hot for one token.
    std::array<float, 24> chroma_and_root(int token) const;

    // Token with the root shifted by `semitones` (mod 12), same quality.
    int transpose(int token, int semitones) const;

private:
    std::vector<std::string> names_;
    std::vector<uint16_t> intervals_; // bitset over semitone offsets
};

} // namespace svgen
