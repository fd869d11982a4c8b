#include "svgen/chord/vocab.hpp"

#include <fstream>
#include <sstream>

namespace svgen {

namespace {

// Mirror of data/chord_qualities.txt (version 1).
const char* kBuiltinTable = R"(maj 0,4,7
min 0,3,7
dim 0,3,6
aug 0,4,8
sus2 0,2,7
sus4 0,5,7
5 0,7
6 0,4,7,9
min6 0,3,7,9
69 0,2,4,7,9
min69 0,2,3,7,9
add9 0,2,4,7
minadd9 0,2,3,7
7 0,4,7,10
maj7 0,4,7,11
min7 0,3,7,10
minmaj7 0,3,7,11
dim7 0,3,6,9
min7b5 0,3,6,10
7sus4 0,5,7,10
7sus2 0,2,7,10
7b5 0,4,6,10
7s5 0,4,8,10
maj7b5 0,4,6,11
maj7s5 0,4,8,11
dimmaj7 0,3,6,11
9 0,2,4,7,10
maj9 0,2,4,7,11
min9 0,2,3,7,10
minmaj9 0,2,3,7,11
9sus4 0,2,5,7,10
7b9 0,1,4,7,10
7s9 0,3,4,7,10
9b5 0,2,4,6,10
9s5 0,2,4,8,10
7b9b5 0,1,4,6,10
7b9s5 0,1,4,8,10
7s9b5 0,3,4,6,10
7s9s5 0,3,4,8,10
11 0,2,4,5,7,10
maj11 0,2,4,5,7,11
min11 0,2,3,5,7,10
minmaj11 0,2,3,5,7,11
7s11 0,2,4,6,7,10
maj7s11 0,2,4,6,7,11
13 0,2,4,7,9,10
maj13 0,2,4,7,9,11
min13 0,2,3,5,7,9,10
13sus4 0,2,5,7,9,10
13b9 0,1,4,7,9,10
13s11 0,2,4,6,7,9,10
)";

} // namespace

const ChordVocab& ChordVocab::instance() {
    static const ChordVocab v = from_table_text(kBuiltinTable);
    return v;
}

ChordVocab ChordVocab::from_table_text(const std::string& text) {
    ChordVocab v;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string name, offsets;
        if (!(ls >> name >> offsets)) throw data_error("chord quality table: bad line: " + line);
        uint16_t bits = 0;
        std::istringstream os(offsets);
        std::string tok;
        while (std::getline(os, tok, ',')) {
            const int off = std::stoi(tok);
            if (off < 0 || off > 11) throw data_error("chord quality table: offset out of range in " + name);
            bits |= static_cast<uint16_t>(1u << off);
        }
        if (!(bits & 1u)) throw data_error("chord quality table: quality must contain the root: " + name);
        v.names_.push_back(name);
        v.intervals_.push_back(bits);
    }
    if (static_cast<int>(v.names_.size()) != kNumQualities) {
        throw data_error("chord quality table: expected " + std::to_string(kNumQualities) + " qualities, got " +
                         std::to_string(v.names_.size()));
    }
    return v;
}

ChordVocab ChordVocab::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw data_error("cannot open chord quality table: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_table_text(ss.str());
}

int ChordVocab::encode(int root, int quality) const {
    if (root < 0 || root >= kNumRoots) throw data_error("chord root out of range");
    if (quality < 0 || quality >= kNumQualities) throw data_error("chord quality out of range");
    return root * kNumQualities + quality;
}

ChordVocab::Decoded ChordVocab::decode(int token) const {
    if (token < 0 || token >= kChordVocabSize) throw data_error("chord token out of range");
    Decoded d;
    d.root = token / kNumQualities;
    d.quality = token % kNumQualities;
    const uint16_t base = intervals_[d.quality];
    for (int i = 0; i < 12; ++i) {
        if (base & (1u << i)) d.chroma |= static_cast<uint16_t>(1u << ((i + d.root) % 12));
    }
    return d;
}

std::array<float, 24> ChordVocab::chroma_and_root(int token) const {
    const Decoded d = decode(token);
    std::array<float, 24> out{};
    for (int i = 0; i < 12; ++i) {
        if (d.chroma & (1u << i)) out[i] = 1.0f;
    }
    out[12 + d.root] = 1.0f;
    return out;
}

int ChordVocab::transpose(int token, int semitones) const {
    const Decoded d = decode(token);
    const int root = ((d.root + semitones) % 12 + 12) % 12;
    return encode(root, d.quality);
}

} // namespace svgen
