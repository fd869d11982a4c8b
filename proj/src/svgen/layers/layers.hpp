#pragma once

#include <string>

#include "svgen/core/graph.hpp"
#include "svgen/core/rng.hpp"

namespace svgen {

// ---- initializers -----------------------------------------------------------

// Orthogonal init (QR of a Gaussian matrix, sign-fixed by the diagonal of R).
template <typename Real>
Mat<Real> orthogonal_init(int rows, int cols, Rng& rng) {
    const int big = std::max(rows, cols), small = std::min(rows, cols);
    Eigen::MatrixXd a(big, small);
    for (int i = 0; i < big; ++i) {
        for (int j = 0; j < small; ++j) a(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
    Eigen::MatrixXd r = qr.matrixQR().topRows(small).template triangularView<Eigen::Upper>();
    for (int j = 0; j < small; ++j) {
        if (r(j, j) < 0) q.col(j) *= -1.0;
    }
    Mat<Real> out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            out(i, j) = static_cast<Real>(rows >= cols ? q(i, j) : q(j, i));
        }
    }
    return out;
}

// He-normal init with the given fan-in.
template <typename Real>
Mat<Real> he_init(int rows, int cols, int fan_in, Rng& rng) {
    const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
    Mat<Real> out(rows, cols);
    for (auto& v : out.data) v = static_cast<Real>(rng.normal() * std);
    return out;
}

// ---- layers ------------------------------------------------------------------

// Unidirectional GRU over a (input_dim x T) sequence; h0 = 0 unless given.
// Input and recurrent weights are orthogonal-initialized, biases zero.
template <typename Real>
struct GruLayer {
    int input_dim = 0, hidden_dim = 0;
    Param<Real>*wr, *ur, *br, *wz, *uz, *bz, *wh, *uh, *bh;

    GruLayer(ParamStore<Real>& ps, const std::string& prefix, int in_dim, int hid_dim, Rng& rng)
        : input_dim(in_dim), hidden_dim(hid_dim) {
        wr = &ps.add(prefix + ".w_r", orthogonal_init<Real>(hid_dim, in_dim, rng));
        ur = &ps.add(prefix + ".u_r", orthogonal_init<Real>(hid_dim, hid_dim, rng));
        br = &ps.add(prefix + ".b_r", Mat<Real>(hid_dim, 1));
        wz = &ps.add(prefix + ".w_z", orthogonal_init<Real>(hid_dim, in_dim, rng));
        uz = &ps.add(prefix + ".u_z", orthogonal_init<Real>(hid_dim, hid_dim, rng));
        bz = &ps.add(prefix + ".b_z", Mat<Real>(hid_dim, 1));
        wh = &ps.add(prefix + ".w_h", orthogonal_init<Real>(hid_dim, in_dim, rng));
        uh = &ps.add(prefix + ".u_h", orthogonal_init<Real>(hid_dim, hid_dim, rng));
        bh = &ps.add(prefix + ".b_h", Mat<Real>(hid_dim, 1));
    }

    typename Graph<Real>::NodeId forward(Graph<Real>& g, typename Graph<Real>::NodeId x,
                                         typename Graph<Real>::NodeId h0 = Graph<Real>::kNone) const {
        typename Graph<Real>::GruParams p{g.param(*wr), g.param(*ur), g.param(*br), g.param(*wz), g.param(*uz),
                                          g.param(*bz), g.param(*wh), g.param(*uh), g.param(*bh)};
        return g.gru(x, p, h0);
    }

    // Single recurrence step on plain values (no tape); used by samplers.
    Mat<Real> step(const Mat<Real>& x_t, const Mat<Real>& h_prev) const {
        const int hd = hidden_dim;
        Mat<Real> ar = mat_mul(wr->value, x_t), az = mat_mul(wz->value, x_t), ah = mat_mul(wh->value, x_t);
        Mat<Real> ur_h = mat_mul(ur->value, h_prev), uz_h = mat_mul(uz->value, h_prev);
        Mat<Real> h(hd, 1), q(hd, 1);
        std::vector<Real> r(hd), z(hd);
        for (int i = 0; i < hd; ++i) {
            r[i] = Real(1) / (Real(1) + std::exp(-(ar(i, 0) + ur_h(i, 0) + br->value(i, 0))));
            z[i] = Real(1) / (Real(1) + std::exp(-(az(i, 0) + uz_h(i, 0) + bz->value(i, 0))));
            q(i, 0) = r[i] * h_prev(i, 0);
        }
        Mat<Real> uh_q = mat_mul(uh->value, q);
        for (int i = 0; i < hd; ++i) {
            const Real hc = std::tanh(ah(i, 0) + uh_q(i, 0) + bh->value(i, 0));
            h(i, 0) = (Real(1) - z[i]) * h_prev(i, 0) + z[i] * hc;
        }
        return h;
    }
};

// Grouped dilated 1-D convolution, same-length zero padding, He init.
template <typename Real>
struct Conv1dLayer {
    int channels_in = 0, channels_out = 0, kernel = 3, dilation = 1, groups = 1;
    Param<Real>*w, *b;

    Conv1dLayer(ParamStore<Real>& ps, const std::string& prefix, int cin, int cout, int k, int d, int g, Rng& rng)
        : channels_in(cin), channels_out(cout), kernel(k), dilation(d), groups(g) {
        if (cin % g != 0 || cout % g != 0) throw data_error("Conv1dLayer: channels not divisible by groups");
        const int cpg_in = cin / g;
        w = &ps.add(prefix + ".w", he_init<Real>(cout, cpg_in * k, cpg_in * k, rng));
        b = &ps.add(prefix + ".b", Mat<Real>(cout, 1));
    }

    typename Graph<Real>::NodeId forward(Graph<Real>& g, typename Graph<Real>::NodeId x) const {
        return g.conv1d(x, g.param(*w), g.param(*b), kernel, dilation, groups);
    }
};

// Group normalization with per-channel affine.
template <typename Real>
struct GroupNormLayer {
    int channels = 0, groups = 1;
    Real eps = Real(1e-5);
    Param<Real>*gamma, *beta;

    GroupNormLayer(ParamStore<Real>& ps, const std::string& prefix, int ch, int g)
        : channels(ch), groups(g) {
        if (ch % g != 0) throw data_error("GroupNormLayer: channels not divisible by groups");
        gamma = &ps.add(prefix + ".gamma", Mat<Real>::filled(ch, 1, Real(1)));
        beta = &ps.add(prefix + ".beta", Mat<Real>(ch, 1));
    }

    typename Graph<Real>::NodeId forward(Graph<Real>& g, typename Graph<Real>::NodeId x) const {
        return g.group_norm(x, g.param(*gamma), g.param(*beta), groups, eps);
    }
};

// Dense layer y = W x + b applied column-wise over a sequence.
template <typename Real>
struct DenseLayer {
    int in_dim = 0, out_dim = 0;
    Param<Real>*w, *b;

    DenseLayer(ParamStore<Real>& ps, const std::string& prefix, int in, int out, Rng& rng, bool zero_init = false)
        : in_dim(in), out_dim(out) {
        w = &ps.add(prefix + ".w", zero_init ? Mat<Real>(out, in) : he_init<Real>(out, in, in, rng));
        b = &ps.add(prefix + ".b", Mat<Real>(out, 1));
    }

    typename Graph<Real>::NodeId forward(Graph<Real>& g, typename Graph<Real>::NodeId x) const {
        return g.add_col(g.matmul(g.param(*w), x), g.param(*b));
    }

    Mat<Real> apply(const Mat<Real>& x) const {
        Mat<Real> y = mat_mul(w->value, x);
        for (int r = 0; r < y.rows; ++r) {
            for (int c = 0; c < y.cols; ++c) y(r, c) += b->value(r, 0);
        }
        return y;
    }
};

// Residual recurrent-convolutional block: the block input, the GRU output and
// the group-normalized convolution of the GRU output are summed. The leaky
// ReLU is the block's output activation by default; `activation_after_sum =
// false` moves it onto the normalized branch before the sum instead (which
// makes the zero-parameter block an exact identity).
template <typename Real>
struct G3Block {
    GruLayer<Real> gru;
    Conv1dLayer<Real> conv;
    GroupNormLayer<Real> norm;
    Real slope = Real(0.01);
    bool activation_after_sum = true;

    G3Block(ParamStore<Real>& ps, const std::string& prefix, int width, Rng& rng, Real leaky_slope = Real(0.01),
            bool act_after_sum = true)
        : gru(ps, prefix + ".gru", width, width, rng),
          conv(ps, prefix + ".conv", width, width, /*k=*/3, /*d=*/2, /*g=*/4, rng),
          norm(ps, prefix + ".norm", width, 4),
          slope(leaky_slope),
          activation_after_sum(act_after_sum) {}

    typename Graph<Real>::NodeId forward(Graph<Real>& g, typename Graph<Real>::NodeId x) const {
        auto h = gru.forward(g, x);
        auto n = norm.forward(g, conv.forward(g, h));
        if (!activation_after_sum) n = g.leaky_relu(n, slope);
        auto sum = g.add(g.add(x, h), n);
        return activation_after_sum ? g.leaky_relu(sum, slope) : sum;
    }
};

} // namespace svgen
