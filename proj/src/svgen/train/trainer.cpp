#include "svgen/train/trainer.hpp"

#include <algorithm>
#include <map>

#include "svgen/core/optim.hpp"

namespace svgen {

int select_best_epoch(const std::vector<double>& history) {
    if (history.empty()) throw data_error("select_best_epoch: empty history");
    int best = 0;
    for (int i = 1; i < static_cast<int>(history.size()); ++i) {
        if (history[i] < history[best]) best = i;
    }
    return best;
}

BeganTrainer::BeganTrainer(const TrainConfig& cfg, std::vector<ClipData> clips)
    : cfg_(cfg),
      clips_(std::move(clips)),
      init_rng_(mix_seed(cfg.seed, 0x1717u)),
      model_(G3BeganConfig{cfg.noise_dim, cfg.width, cfg.mel_bins, cfg.mode, cfg.leaky_slope,
                           cfg.activation_after_sum},
             init_rng_),
      rng_(mix_seed(cfg.seed, 0x7a21u)) {
    if (clips_.empty()) throw data_error("trainer: empty dataset");
    for (const auto& c : clips_) {
        if (c.mel.rows != cfg_.mel_bins) throw data_error("trainer: clip rows must equal mel_bins");
        model_.check_condition(c.mel.cols, c.cond ? &*c.cond : nullptr);
    }
    state_.began.tau = cfg.tau0;
    state_.began.lambda = cfg.lambda;
    state_.began.gamma = cfg.gamma;

    // Deterministic validation split: the tail of a seeded shuffle.
    std::vector<int> order(clips_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng split_rng(mix_seed(cfg.seed, 0x5317u));
    shuffle(order, split_rng);
    const int n_val = std::min(static_cast<int>(clips_.size()) - 1,
                               static_cast<int>(std::floor(cfg.val_fraction * clips_.size())));
    for (size_t i = 0; i < order.size(); ++i) {
        if (static_cast<int>(i) < n_val) {
            val_idx_.push_back(order[i]);
        } else {
            train_idx_.push_back(order[i]);
        }
    }
    std::sort(train_idx_.begin(), train_idx_.end());
    std::sort(val_idx_.begin(), val_idx_.end());
}

void BeganTrainer::start_epoch() {
    // Shuffle, bucket by frame count, emit batches of equal-length clips.
    std::vector<int> order = train_idx_;
    shuffle(order, rng_);
    std::map<int, std::vector<int>> buckets;
    for (int idx : order) buckets[clips_[idx].mel.cols].push_back(idx);
    pending_batches_.clear();
    for (auto& [frames, members] : buckets) {
        for (size_t i = 0; i < members.size(); i += cfg_.batch_size) {
            const size_t end = std::min(members.size(), i + cfg_.batch_size);
            pending_batches_.emplace_back(members.begin() + i, members.begin() + end);
        }
    }
    std::reverse(pending_batches_.begin(), pending_batches_.end());
}

StepStats BeganTrainer::step() {
    if (pending_batches_.empty()) start_epoch();
    std::vector<int> batch = std::move(pending_batches_.back());
    pending_batches_.pop_back();
    StepStats stats = run_batch(batch);
    if (pending_batches_.empty()) ++state_.epoch;
    return stats;
}

StepStats BeganTrainer::run_batch(const std::vector<int>& batch) {
    using G = Graph<float>;
    G g;

    // Shared forward pass: batch means of L(X,C) and L(G(Z,C),C).
    G::NodeId lx_sum = G::kNone, lg_sum = G::kNone;
    for (int idx : batch) {
        const ClipData& clip = clips_[idx];
        const int T = clip.mel.cols;
        auto x = g.input(clip.mel);
        auto c = clip.cond ? g.input(*clip.cond) : G::kNone;
        auto z = g.input(sample_gaussian<float>(rng_, cfg_.noise_dim, T));

        auto fake = model_.gen_forward(g, z, c);
        auto d_real = model_.disc_forward(g, x, c);
        auto d_fake = model_.disc_forward(g, fake, c);
        auto lx_i = g.l1_diff_mean(d_real, x);
        auto lg_i = g.l1_diff_mean(d_fake, fake);
        lx_sum = lx_sum == G::kNone ? lx_i : g.add(lx_sum, lx_i);
        lg_sum = lg_sum == G::kNone ? lg_i : g.add(lg_sum, lg_i);
    }
    const float inv_b = 1.0f / static_cast<float>(batch.size());
    auto lx_node = g.scale(lx_sum, inv_b);
    auto lg_node = g.scale(lg_sum, inv_b);
    const double lx = g.scalar_val(lx_node);
    const double lg = g.scalar_val(lg_node);
    if (!std::isfinite(lx) || !std::isfinite(lg)) {
        throw numeric_error("train_step: non-finite loss at step " + std::to_string(state_.step + 1));
    }
    auto [l_d, l_g] = began_losses(state_.began, lx, lg);

    // Both updates are computed from the same pre-update forward values:
    // backprop l_D for the discriminator, then l_G for the generator.
    auto l_d_node = g.sub(lx_node, g.scale(lg_node, static_cast<float>(state_.began.tau)));
    g.backward(l_d_node);
    model_.g_params.zero_grads(); // discard generator contamination from l_D
    clip_grad_norm(model_.d_params, cfg_.grad_clip);
    const int64_t next_step = state_.step + 1;
    adam_step(model_.d_params, cfg_.lr, 0.9, 0.999, 1e-8, next_step);

    g.zero_grads();
    g.backward(lg_node);
    model_.d_params.zero_grads();
    clip_grad_norm(model_.g_params, cfg_.grad_clip);
    adam_step(model_.g_params, cfg_.lr, 0.9, 0.999, 1e-8, next_step);

    state_.began = tau_update(state_.began, lx, lg);
    if (state_.began.tau < 0.0 || state_.began.tau > 1.0) {
        throw numeric_error("train_step: tau left [0,1] at step " + std::to_string(next_step));
    }
    state_.step = next_step;

    StepStats s;
    s.step = state_.step;
    s.epoch = state_.epoch;
    s.lx = lx;
    s.lg = lg;
    s.l_d = l_d;
    s.l_g = l_g;
    s.tau = state_.began.tau;
    s.metric = convergence_metric(lx, lg, cfg_.gamma);
    return s;
}

std::vector<StepStats> BeganTrainer::run_epoch() {
    std::vector<StepStats> out;
    const int epoch = state_.epoch;
    while (state_.epoch == epoch) out.push_back(step());
    return out;
}

double BeganTrainer::validate() {
    // Per-epoch derived noise stream, independent of the training stream.
    Rng noise_rng(mix_seed(cfg_.seed, 0xa110u + static_cast<uint64_t>(state_.epoch)));
    const std::vector<int>& idx = val_idx_.empty() ? train_idx_ : val_idx_;
    double metric = 0.0;
    for (int i : idx) {
        double lx = 0.0, lg = 0.0;
        eval_pair(clips_[i], noise_rng, lx, lg);
        metric += convergence_metric(lx, lg, cfg_.gamma);
    }
    return metric / static_cast<double>(idx.size());
}

double BeganTrainer::eval_pair(const ClipData& clip, Rng& noise_rng, double& lx, double& lg) {
    using G = Graph<float>;
    G g;
    auto x = g.input(clip.mel);
    auto c = clip.cond ? g.input(*clip.cond) : G::kNone;
    auto z = g.input(sample_gaussian<float>(noise_rng, cfg_.noise_dim, clip.mel.cols));
    auto fake = model_.gen_forward(g, z, c);
    lx = g.scalar_val(g.l1_diff_mean(model_.disc_forward(g, x, c), x));
    lg = g.scalar_val(g.l1_diff_mean(model_.disc_forward(g, fake, c), fake));
    return lx;
}

void BeganTrainer::run(int epochs, const std::function<void(const StepStats&)>& on_step,
                       const std::function<void(int, double)>& on_epoch) {
    for (int e = 0; e < epochs; ++e) {
        auto stats = run_epoch();
        if (on_step) {
            for (const auto& s : stats) on_step(s);
        }
        const double metric = validate();
        state_.epoch_metric_history.push_back(metric);
        if (on_epoch) on_epoch(state_.epoch - 1, metric);
    }
}

void BeganTrainer::restore(const TrainerState& st, const Rng::State& rng_state) {
    state_ = st;
    rng_.set_state(rng_state);
    pending_batches_.clear(); // resume on an epoch boundary
}

} // namespace svgen
