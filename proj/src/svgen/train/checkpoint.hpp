#pragma once

#include <memory>

#include "svgen/audio/mel.hpp"
#include "svgen/chord/chord_model.hpp"
#include "svgen/train/trainer.hpp"

namespace svgen {

// Checkpoint container, little-endian:
//   magic "G3CK" | version u32
//   | blob_count u32 | blobs: name_len u32, name, dtype u8 (0 f32 / 1 f64),
//     rows u32, cols u32, payload
//   | state_len u32 | state bytes (model kind + trainer state + rng + norm)
//   | crc32 u32 over all preceding bytes
//
// Every parameter is stored three times: value, Adam m1 and m2, so loading
// resumes training exactly. A truncated or edited file fails the checksum
// before anything is parsed.
constexpr uint32_t kCheckpointVersion = 1;

struct LoadedBegan {
    std::unique_ptr<G3BeganModel<float>> model;
    TrainConfig cfg; // model-shape fields only (noise_dim, width, mode, ...)
    TrainerState state;
    Rng::State rng;
    MelNorm norm;
};

void save_checkpoint(const std::string& path, const G3BeganModel<float>& model, const TrainerState& state,
                     const Rng::State& rng, const MelNorm& norm);
LoadedBegan load_checkpoint(const std::string& path);

struct LoadedChord {
    std::unique_ptr<ChordModel> model;
    int64_t step = 0;
};

void save_chord_checkpoint(const std::string& path, const ChordModel& model, int64_t step);
LoadedChord load_chord_checkpoint(const std::string& path);

// Distinguishes the two container payloads without loading them.
bool is_chord_checkpoint(const std::string& path);

} // namespace svgen
