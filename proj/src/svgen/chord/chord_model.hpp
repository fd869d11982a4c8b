#pragma once

#include <optional>

#include "svgen/chord/leadsheet.hpp"
#include "svgen/layers/layers.hpp"

namespace svgen {

// Autoregressive chord progression model: a 512-dim chord embedding plus a
// 12-dim beat-position one-hot (melody-harmonization variant appends a 12-dim
// melody chroma) feeds a linear layer into 3 stacked 512-unit GRUs and a
// projection onto the 612-token vocabulary. The 40-dim generation condition
// initializes the first GRU state through a learned linear map.
//
// The output projection starts at zero, so an untrained model is exactly
// uniform over the vocabulary.
struct ChordModelConfig {
    int embed_dim = 512;
    int hidden_dim = 512;
    bool melody_input = false; // true for the melody-harmonization model

    int step_input_dim() const { return embed_dim + kBeatPositions + (melody_input ? 12 : 0); }
};

class ChordModel {
public:
    ChordModel(const ChordModelConfig& cfg, uint64_t init_seed);

    const ChordModelConfig& config() const { return cfg_; }
    ParamStore<float>& params() { return params_; }
    const ParamStore<float>& params() const { return params_; }

    // Teacher-forced mean NLL over one sheet (loss node on the caller's tape).
    // The melody chroma is required iff the model is the MH variant.
    Graph<float>::NodeId nll_loss(Graph<float>& g, const LeadSheet& sheet, const Mat32* chroma = nullptr) const;

    // Mean log-likelihood of `chords` given the melody chroma (12 x N, one
    // column per step). MH variant only.
    double matchness(const Mat32& chroma, const std::vector<int>& chords,
                     const std::optional<LeadSheet>& meta = std::nullopt) const;

    // Single autoregressive step on plain values.
    struct State {
        Mat32 h1, h2, h3;
        bool started = false;
    };
    State initial_state(const Mat32& cond) const;
    std::vector<double> step_probs(int prev_token, int beat_pos, State& state, const float* chroma12 = nullptr) const;

    // Sampled progression of bars * beats_per_bar tokens; temperature -> 0
    // degenerates to greedy argmax.
    std::vector<int> sample_progression(int key_root, bool minor, double bpm, int ts_index, int bars,
                                        double temperature, uint64_t seed) const;

private:
    Graph<float>::NodeId forward_logits(Graph<float>& g, const std::vector<int>& prev_tokens, int ts_index,
                                        const Mat32& cond, const Mat32* chroma) const;

    ChordModelConfig cfg_;
    ParamStore<float> params_;
    Param<float>* embedding_; // embed_dim x 612
    std::unique_ptr<DenseLayer<float>> in_proj_;
    std::unique_ptr<GruLayer<float>> gru1_, gru2_, gru3_;
    std::unique_ptr<DenseLayer<float>> out_proj_;
    std::unique_ptr<DenseLayer<float>> cond_proj_;
};

// Simple Adam training loop over sheets (cycled in order); returns the
// teacher-forced NLL logged at every step. `start_step` continues the Adam
// bias-correction count when training in chunks.
struct ChordTrainConfig {
    int steps = 200;
    double lr = 1e-3;
    double grad_clip = 3.0;
    uint64_t seed = 1;
    int64_t start_step = 0;
};

std::vector<double> train_chord_model(ChordModel& model, const std::vector<LeadSheet>& sheets,
                                      const ChordTrainConfig& cfg);

} // namespace svgen
