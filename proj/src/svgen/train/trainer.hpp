#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "svgen/model/began.hpp"

namespace svgen {

struct TrainConfig {
    uint64_t seed = 1;
    double lr = 1e-4;
    int batch_size = 5;
    double grad_clip = 3.0;
    int epochs = 500;
    double lambda = 0.001;
    double gamma = 0.5;
    double tau0 = 0.0;
    int noise_dim = 20;
    int width = 128;
    int mel_bins = 80;
    CondMode mode = CondMode::kFree;
    double val_fraction = 0.1;
    int d_steps_per_g = 1;
    bool activation_after_sum = true;
    double leaky_slope = 0.01;
};

struct ClipData {
    Mat32 mel;                 // 80 x T, normalized
    std::optional<Mat32> cond; // 88 x T or 24 x T depending on the mode
};

struct StepStats {
    int64_t step = 0;
    int epoch = 0;
    double lx = 0.0;
    double lg = 0.0;
    double l_d = 0.0;
    double l_g = 0.0;
    double tau = 0.0;
    double metric = 0.0; // lx + |gamma*lx - lg|
};

struct TrainerState {
    int64_t step = 0;
    int epoch = 0;
    BeganState began;
    std::vector<double> epoch_metric_history; // validation convergence metric per epoch
};

// Earliest index of the minimum validation metric.
int select_best_epoch(const std::vector<double>& history);

// Mini-batch adversarial trainer. Batches bucket clips of identical frame
// count; each step runs one discriminator and one generator update computed
// from the same forward pass, then advances the equilibrium variable once.
class BeganTrainer {
public:
    BeganTrainer(const TrainConfig& cfg, std::vector<ClipData> clips);

    // One optimizer step; starts a new shuffled epoch when the previous one
    // is exhausted.
    StepStats step();

    // Runs a full pass over the training split.
    std::vector<StepStats> run_epoch();

    // Mean convergence metric over the validation split (fixed per-epoch
    // noise stream so resumed runs reproduce uninterrupted ones). Falls back
    // to the training split when no clips were held out.
    double validate();

    // Runs `epochs` epochs with validation + history bookkeeping.
    void run(int epochs, const std::function<void(const StepStats&)>& on_step = nullptr,
             const std::function<void(int, double)>& on_epoch = nullptr);

    G3BeganModel<float>& model() { return model_; }
    const TrainConfig& config() const { return cfg_; }
    TrainerState& state() { return state_; }
    Rng& rng() { return rng_; }

    int train_clip_count() const { return static_cast<int>(train_idx_.size()); }
    int val_clip_count() const { return static_cast<int>(val_idx_.size()); }

    // Internals exposed for checkpoint restore.
    void restore(const TrainerState& st, const Rng::State& rng_state);

private:
    void start_epoch();
    StepStats run_batch(const std::vector<int>& batch);
    double eval_pair(const ClipData& clip, Rng& noise_rng, double& lx, double& lg);

    TrainConfig cfg_;
    std::vector<ClipData> clips_;
    std::vector<int> train_idx_, val_idx_;
    Rng init_rng_; // consumed by model construction; declared before model_
    G3BeganModel<float> model_;
    TrainerState state_;
    Rng rng_;
    std::vector<std::vector<int>> pending_batches_; // consumed back to front
};

} // namespace svgen
