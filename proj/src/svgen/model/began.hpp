#pragma once

#include <optional>

#include "svgen/layers/layers.hpp"

namespace svgen {

// Conditioning schemes: free singer (none), accompanied singer (88-row piano
// roll), solo singer (12 chord chroma + 12 root one-hot rows).
enum class CondMode : uint8_t { kFree = 0, kPianoRoll = 1, kChord = 2 };

inline int cond_dim(CondMode m) {
    switch (m) {
        case CondMode::kFree: return 0;
        case CondMode::kPianoRoll: return 88;
        case CondMode::kChord: return 24;
    }
    return 0;
}

inline const char* cond_mode_name(CondMode m) {
    switch (m) {
        case CondMode::kFree: return "free";
        case CondMode::kPianoRoll: return "piano_roll";
        case CondMode::kChord: return "chord";
    }
    return "free";
}

struct G3BeganConfig {
    int noise_dim = 20;
    int width = 128;
    int mel_bins = 80;
    CondMode mode = CondMode::kFree;
    double leaky_slope = 0.01;
    bool activation_after_sum = true;
};

// Input conv -> group norm -> leaky ReLU -> two residual blocks -> output conv.
// The generator and the discriminator share this stack shape; the
// discriminator is a same-length sequence autoencoder reconstructing the mel
// rows of its input.
template <typename Real>
struct G3Stack {
    Conv1dLayer<Real> in_conv;
    GroupNormLayer<Real> in_norm;
    G3Block<Real> block1, block2;
    Conv1dLayer<Real> out_conv;
    Real slope;

    G3Stack(ParamStore<Real>& ps, const std::string& prefix, int in_rows, int width, int out_rows, Rng& rng,
            Real leaky_slope, bool act_after_sum)
        : in_conv(ps, prefix + ".in_conv", in_rows, width, 3, 1, 1, rng),
          in_norm(ps, prefix + ".in_norm", width, 4),
          block1(ps, prefix + ".block1", width, rng, leaky_slope, act_after_sum),
          block2(ps, prefix + ".block2", width, rng, leaky_slope, act_after_sum),
          out_conv(ps, prefix + ".out_conv", width, out_rows, 3, 1, 1, rng),
          slope(leaky_slope) {}

    typename Graph<Real>::NodeId forward(Graph<Real>& g, typename Graph<Real>::NodeId x) const {
        auto h = g.leaky_relu(in_norm.forward(g, in_conv.forward(g, x)), slope);
        h = block1.forward(g, h);
        h = block2.forward(g, h);
        return out_conv.forward(g, h);
    }
};

template <typename Real>
struct G3BeganModel {
    G3BeganConfig cfg;
    ParamStore<Real> g_params;
    ParamStore<Real> d_params;
    G3Stack<Real> gen;
    G3Stack<Real> disc;

    G3BeganModel(const G3BeganConfig& c, Rng& rng)
        : cfg(c),
          gen(g_params, "gen", c.noise_dim + cond_dim(c.mode), c.width, c.mel_bins, rng,
              static_cast<Real>(c.leaky_slope), c.activation_after_sum),
          disc(d_params, "disc", c.mel_bins + cond_dim(c.mode), c.width, c.mel_bins, rng,
               static_cast<Real>(c.leaky_slope), c.activation_after_sum) {}

    void check_condition(int frames, const Mat<Real>* c) const {
        if (cfg.mode == CondMode::kFree) {
            if (c != nullptr) throw data_error("condition provided but the model is unconditioned");
            return;
        }
        if (c == nullptr) throw data_error("missing condition for mode " + std::string(cond_mode_name(cfg.mode)));
        if (c->rows != cond_dim(cfg.mode)) {
            throw data_error("condition rows must be " + std::to_string(cond_dim(cfg.mode)) + " for mode " +
                             cond_mode_name(cfg.mode));
        }
        if (c->cols != frames) throw data_error("condition frame count does not match");
    }

    // Generator forward on the tape. z: noise_dim x T, tanh output head in [-1,1].
    typename Graph<Real>::NodeId gen_forward(Graph<Real>& g, typename Graph<Real>::NodeId z,
                                             typename Graph<Real>::NodeId c = Graph<Real>::kNone) const {
        auto in = (c == Graph<Real>::kNone) ? z : g.concat_rows(z, c);
        return g.tanh_act(gen.forward(g, in));
    }

    // Discriminator (autoencoder) forward; reconstructs the mel rows only.
    typename Graph<Real>::NodeId disc_forward(Graph<Real>& g, typename Graph<Real>::NodeId m,
                                              typename Graph<Real>::NodeId c = Graph<Real>::kNone) const {
        auto in = (c == Graph<Real>::kNone) ? m : g.concat_rows(m, c);
        return disc.forward(g, in);
    }

    // Inference-only generation.
    Mat<Real> generate(const Mat<Real>& z, const Mat<Real>* c = nullptr) const {
        if (z.rows != cfg.noise_dim) throw data_error("generate: noise rows must equal noise_dim");
        check_condition(z.cols, c);
        Graph<Real> g;
        auto zid = g.input(z);
        auto cid = c ? g.input(*c) : Graph<Real>::kNone;
        return g.val(gen_forward(g, zid, cid));
    }

    // L(M, C): mean absolute reconstruction error of the discriminator.
    Real disc_recon_loss(const Mat<Real>& m, const Mat<Real>* c = nullptr) const {
        if (m.rows != cfg.mel_bins) throw data_error("disc_recon_loss: input rows must equal mel_bins");
        check_condition(m.cols, c);
        Graph<Real> g;
        auto mid = g.input(m);
        auto cid = c ? g.input(*c) : Graph<Real>::kNone;
        auto recon = disc_forward(g, mid, cid);
        return g.scalar_val(g.l1_diff_mean(recon, mid));
    }
};

// ---- equilibrium bookkeeping -------------------------------------------------

struct BeganState {
    double tau = 0.0;    // in [0, 1]
    double lambda = 0.001;
    double gamma = 0.5;
};

// Discriminator and generator losses from the two reconstruction errors:
//   l_D = lx - tau * lg ,  l_G = lg
inline std::pair<double, double> began_losses(const BeganState& s, double lx, double lg) {
    return {lx - s.tau * lg, lg};
}

// tau' = clamp(tau + lambda * (gamma * lx - lg), 0, 1)
inline BeganState tau_update(const BeganState& s, double lx, double lg) {
    BeganState out = s;
    out.tau = std::clamp(s.tau + s.lambda * (s.gamma * lx - lg), 0.0, 1.0);
    return out;
}

// Convergence measure used for epoch selection: lx + |gamma*lx - lg|.
inline double convergence_metric(double lx, double lg, double gamma) {
    return lx + std::abs(gamma * lx - lg);
}

} // namespace svgen
