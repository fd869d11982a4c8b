#include "svgen/chord/chord_model.hpp"

#include "svgen/core/optim.hpp"

namespace svgen {

ChordModel::ChordModel(const ChordModelConfig& cfg, uint64_t init_seed) : cfg_(cfg) {
    Rng rng(init_seed);
    Mat32 emb(cfg.embed_dim, kChordVocabSize);
    for (auto& v : emb.data) v = static_cast<float>(rng.normal() * 0.1);
    embedding_ = &params_.add("embedding", std::move(emb));
    in_proj_ = std::make_unique<DenseLayer<float>>(params_, "in_proj", cfg.step_input_dim(), cfg.hidden_dim, rng);
    gru1_ = std::make_unique<GruLayer<float>>(params_, "gru1", cfg.hidden_dim, cfg.hidden_dim, rng);
    gru2_ = std::make_unique<GruLayer<float>>(params_, "gru2", cfg.hidden_dim, cfg.hidden_dim, rng);
    gru3_ = std::make_unique<GruLayer<float>>(params_, "gru3", cfg.hidden_dim, cfg.hidden_dim, rng);
    out_proj_ = std::make_unique<DenseLayer<float>>(params_, "out_proj", cfg.hidden_dim, kChordVocabSize, rng,
                                                    /*zero_init=*/true);
    cond_proj_ = std::make_unique<DenseLayer<float>>(params_, "cond_proj", kCondDim, cfg.hidden_dim, rng);
}

Graph<float>::NodeId ChordModel::forward_logits(Graph<float>& g, const std::vector<int>& prev_tokens, int ts_index,
                                                const Mat32& cond, const Mat32* chroma) const {
    const int T = static_cast<int>(prev_tokens.size());
    auto emb = g.gather_cols(g.param(*embedding_), prev_tokens);

    Mat32 beats(kBeatPositions, T);
    for (int t = 0; t < T; ++t) beats(beat_position(t, ts_index), t) = 1.0f;
    auto in = g.concat_rows(emb, g.input(std::move(beats)));
    if (cfg_.melody_input) {
        if (chroma == nullptr || chroma->rows != 12 || chroma->cols != T) {
            throw data_error("chord model: melody chroma must be 12 x steps");
        }
        in = g.concat_rows(in, g.input(*chroma));
    } else if (chroma != nullptr) {
        throw data_error("chord model: melody chroma given to a non-melody model");
    }

    auto x = in_proj_->forward(g, in);
    auto h0 = cond_proj_->forward(g, g.input(cond));
    auto h = gru1_->forward(g, x, h0);
    h = gru2_->forward(g, h);
    h = gru3_->forward(g, h);
    return out_proj_->forward(g, h);
}

Graph<float>::NodeId ChordModel::nll_loss(Graph<float>& g, const LeadSheet& sheet, const Mat32* chroma) const {
    std::vector<int> prev(sheet.chords.size());
    prev[0] = -1;
    for (size_t i = 1; i < sheet.chords.size(); ++i) prev[i] = sheet.chords[i - 1];
    Mat32 mc;
    const Mat32* chroma_in = nullptr;
    if (cfg_.melody_input) {
        mc = chroma ? *chroma : melody_chroma(sheet.melody);
        chroma_in = &mc;
    }
    auto logits = forward_logits(g, prev, sheet.ts_index, gen_condition(sheet), chroma_in);
    return g.softmax_xent_mean(logits, sheet.chords);
}

double ChordModel::matchness(const Mat32& chroma, const std::vector<int>& chords,
                             const std::optional<LeadSheet>& meta) const {
    if (!cfg_.melody_input) throw data_error("matchness requires the melody-harmonization model");
    if (chroma.cols != static_cast<int>(chords.size())) throw data_error("matchness: melody/chord length mismatch");
    LeadSheet sheet;
    if (meta) sheet = *meta;
    sheet.chords = chords;
    sheet.melody.assign(chords.size(), 0);
    Graph<float> g;
    auto loss = nll_loss(g, sheet, &chroma);
    return -static_cast<double>(g.scalar_val(loss));
}

ChordModel::State ChordModel::initial_state(const Mat32& cond) const {
    State s;
    s.h1 = cond_proj_->apply(cond);
    s.h2 = Mat32(cfg_.hidden_dim, 1);
    s.h3 = Mat32(cfg_.hidden_dim, 1);
    s.started = true;
    return s;
}

std::vector<double> ChordModel::step_probs(int prev_token, int beat_pos, State& state, const float* chroma12) const {
    if (!state.started) throw data_error("chord model: state not initialized");
    if (beat_pos < 0 || beat_pos >= kBeatPositions) throw data_error("chord model: beat position out of range");
    if (prev_token < -1 || prev_token >= kChordVocabSize) throw data_error("chord model: invalid previous token");
    if (cfg_.melody_input && chroma12 == nullptr) throw data_error("chord model: melody chroma required");

    Mat32 in(cfg_.step_input_dim(), 1);
    if (prev_token >= 0) {
        for (int r = 0; r < cfg_.embed_dim; ++r) in(r, 0) = embedding_->value(r, prev_token);
    }
    in(cfg_.embed_dim + beat_pos, 0) = 1.0f;
    if (cfg_.melody_input) {
        for (int i = 0; i < 12; ++i) in(cfg_.embed_dim + kBeatPositions + i, 0) = chroma12[i];
    }

    Mat32 x = in_proj_->apply(in);
    state.h1 = gru1_->step(x, state.h1);
    state.h2 = gru2_->step(state.h1, state.h2);
    state.h3 = gru3_->step(state.h2, state.h3);
    Mat32 logits = out_proj_->apply(state.h3);

    // Stable softmax.
    double mx = -1e300;
    for (int i = 0; i < kChordVocabSize; ++i) mx = std::max(mx, static_cast<double>(logits(i, 0)));
    std::vector<double> probs(kChordVocabSize);
    double z = 0.0;
    for (int i = 0; i < kChordVocabSize; ++i) {
        probs[i] = std::exp(static_cast<double>(logits(i, 0)) - mx);
        z += probs[i];
    }
    for (auto& p : probs) p /= z;
    return probs;
}

std::vector<int> ChordModel::sample_progression(int key_root, bool minor, double bpm, int ts_index, int bars,
                                                double temperature, uint64_t seed) const {
    if (bars < 1) throw data_error("sample_progression: bars must be >= 1");
    if (temperature <= 0.0) throw data_error("sample_progression: temperature must be > 0");
    const int steps = bars * beats_per_bar(ts_index);
    Rng rng(seed);
    State state = initial_state(gen_condition(key_root, minor, bpm, ts_index));
    std::vector<int> out;
    out.reserve(steps);
    int prev = -1;
    for (int t = 0; t < steps; ++t) {
        auto probs = step_probs(prev, beat_position(t, ts_index), state);
        // Temperature on log-probabilities; max-subtraction keeps the
        // temperature -> 0 limit equal to the greedy argmax path.
        double mx = -1e300;
        for (double p : probs) mx = std::max(mx, std::log(p + 1e-300));
        double z = 0.0;
        std::vector<double> scaled(probs.size());
        for (size_t i = 0; i < probs.size(); ++i) {
            scaled[i] = std::exp((std::log(probs[i] + 1e-300) - mx) / temperature);
            z += scaled[i];
        }
        const double u = rng.uniform01() * z;
        double acc = 0.0;
        int pick = static_cast<int>(probs.size()) - 1;
        for (size_t i = 0; i < scaled.size(); ++i) {
            acc += scaled[i];
            if (u < acc) {
                pick = static_cast<int>(i);
                break;
            }
        }
        out.push_back(pick);
        prev = pick;
    }
    return out;
}

std::vector<double> train_chord_model(ChordModel& model, const std::vector<LeadSheet>& sheets,
                                      const ChordTrainConfig& cfg) {
    if (sheets.empty()) throw data_error("train_chord_model: no sheets");
    std::vector<double> nll_trace;
    nll_trace.reserve(cfg.steps);
    for (int s = 1; s <= cfg.steps; ++s) {
        const int64_t global_step = cfg.start_step + s;
        const LeadSheet& sheet = sheets[(global_step - 1) % sheets.size()];
        Graph<float> g;
        auto loss = model.nll_loss(g, sheet);
        nll_trace.push_back(g.scalar_val(loss));
        g.backward(loss);
        clip_grad_norm(model.params(), cfg.grad_clip);
        adam_step(model.params(), cfg.lr, 0.9, 0.999, 1e-8, global_step);
    }
    return nll_trace;
}

} // namespace svgen
