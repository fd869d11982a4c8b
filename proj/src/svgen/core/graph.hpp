#pragma once

#include <functional>
#include <vector>

#include "svgen/core/mat.hpp"
#include "svgen/core/param.hpp"

namespace svgen {

// Reverse-mode autodiff tape over Mat<Real>.
//
// Nodes are created in topological order, so backward() is a reverse sweep
// over creation order starting at the root. One graph per forward pass; a
// graph is single-threaded and not reusable across passes. Every node value
// is checked finite on creation.
//
// Fused sequence ops (gru / conv1d / group_norm) carry their own hand-written
// backward rules; the finite-difference suite in tests and `svgen gradcheck`
// verifies all of them.
template <typename Real>
class Graph {
public:
    using NodeId = int;
    static constexpr NodeId kNone = -1;

    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    // ---- leaves -----------------------------------------------------------

    NodeId input(Mat<Real> v) {
        return push(std::move(v), "input", {});
    }

    // Leaf bound to a parameter; backward accumulates into p.grad.
    // The same Param maps to one node per graph.
    NodeId param(Param<Real>& p) {
        auto it = param_nodes_.find(&p);
        if (it != param_nodes_.end()) return it->second;
        NodeId id = push(p.value, "param:" + p.name, {});
        Param<Real>* pp = &p;
        nodes_[id].back = [id, pp](Graph& g) {
            const Mat<Real>& gr = g.nodes_[id].grad;
            for (size_t i = 0; i < gr.data.size(); ++i) pp->grad.data[i] += gr.data[i];
        };
        param_nodes_[&p] = id;
        return id;
    }

    // ---- elementwise and linear ops ---------------------------------------

    NodeId matmul(NodeId a, NodeId b) {
        const Mat<Real>&A = val(a), &B = val(b);
        if (A.cols != B.rows) throw data_error("matmul: inner dimensions do not match");
        Mat<Real> c(A.rows, B.cols);
        emap(c).noalias() = cemap(A) * cemap(B);
        NodeId id = push(std::move(c), "matmul", {a, b});
        nodes_[id].back = [id, a, b](Graph& g) {
            const Mat<Real>& gr = g.nodes_[id].grad;
            const Mat<Real>&A = g.val(a), &B = g.val(b);
            emap(g.grad_ref(a)).noalias() += cemap(gr) * cemap(B).transpose();
            emap(g.grad_ref(b)).noalias() += cemap(A).transpose() * cemap(gr);
        };
        return id;
    }

    NodeId add(NodeId a, NodeId b) {
        const Mat<Real>&A = val(a), &B = val(b);
        if (!A.same_shape(B)) throw data_error("add: shape mismatch");
        Mat<Real> c = A;
        for (size_t i = 0; i < c.data.size(); ++i) c.data[i] += B.data[i];
        NodeId id = push(std::move(c), "add", {a, b});
        nodes_[id].back = [id, a, b](Graph& g) {
            const Mat<Real>& gr = g.nodes_[id].grad;
            accumulate(g.grad_ref(a), gr, Real(1));
            accumulate(g.grad_ref(b), gr, Real(1));
        };
        return id;
    }

    NodeId sub(NodeId a, NodeId b) {
        const Mat<Real>&A = val(a), &B = val(b);
        if (!A.same_shape(B)) throw data_error("sub: shape mismatch");
        Mat<Real> c = A;
        for (size_t i = 0; i < c.data.size(); ++i) c.data[i] -= B.data[i];
        NodeId id = push(std::move(c), "sub", {a, b});
        nodes_[id].back = [id, a, b](Graph& g) {
            const Mat<Real>& gr = g.nodes_[id].grad;
            accumulate(g.grad_ref(a), gr, Real(1));
            accumulate(g.grad_ref(b), gr, Real(-1));
        };
        return id;
    }

    NodeId hadamard(NodeId a, NodeId b) {
        const Mat<Real>&A = val(a), &B = val(b);
        if (!A.same_shape(B)) throw data_error("hadamard: shape mismatch");
        Mat<Real> c = A;
        for (size_t i = 0; i < c.data.size(); ++i) c.data[i] *= B.data[i];
        NodeId id = push(std::move(c), "hadamard", {a, b});
        nodes_[id].back = [id, a, b](Graph& g) {
            const Mat<Real>& gr = g.nodes_[id].grad;
            const Mat<Real>&A = g.val(a), &B = g.val(b);
            Mat<Real>&da = g.grad_ref(a), &db = g.grad_ref(b);
            for (size_t i = 0; i < gr.data.size(); ++i) {
                da.data[i] += gr.data[i] * B.data[i];
                db.data[i] += gr.data[i] * A.data[i];
            }
        };
        return id;
    }

    NodeId scale(NodeId a, Real s) {
        Mat<Real> c = val(a);
        for (auto& v : c.data) v *= s;
        NodeId id = push(std::move(c), "scale", {a});
        nodes_[id].back = [id, a, s](Graph& g) {
            accumulate(g.grad_ref(a), g.nodes_[id].grad, s);
        };
        return id;
    }

    // a (r x c) plus a column vector (r x 1) broadcast over columns.
    NodeId add_col(NodeId a, NodeId bias) {
        const Mat<Real>&A = val(a), &B = val(bias);
        if (B.cols != 1 || B.rows != A.rows) throw data_error("add_col: bias must be rows x 1");
        Mat<Real> c = A;
        for (int r = 0; r < c.rows; ++r) {
            const Real bv = B(r, 0);
            for (int j = 0; j < c.cols; ++j) c(r, j) += bv;
        }
        NodeId id = push(std::move(c), "add_col", {a, bias});
        nodes_[id].back = [id, a, bias](Graph& g) {
            const Mat<Real>& gr = g.nodes_[id].grad;
            accumulate(g.grad_ref(a), gr, Real(1));
            Mat<Real>& db = g.grad_ref(bias);
            for (int r = 0; r < gr.rows; ++r) {
                Real s = 0;
                for (int j = 0; j < gr.cols; ++j) s += gr(r, j);
                db(r, 0) += s;
            }
        };
        return id;
    }

    NodeId sigmoid(NodeId a) {
        Mat<Real> c = val(a);
        for (auto& v : c.data) v = Real(1) / (Real(1) + std::exp(-v));
        NodeId id = push(std::move(c), "sigmoid", {a});
        nodes_[id].back = [id, a](Graph& g) {
            const Mat<Real>&gr = g.nodes_[id].grad, &y = g.val(id);
            Mat<Real>& da = g.grad_ref(a);
            for (size_t i = 0; i < gr.data.size(); ++i) da.data[i] += gr.data[i] * y.data[i] * (Real(1) - y.data[i]);
        };
        return id;
    }

    NodeId tanh_act(NodeId a) {
        Mat<Real> c = val(a);
        for (auto& v : c.data) v = std::tanh(v);
        NodeId id = push(std::move(c), "tanh", {a});
        nodes_[id].back = [id, a](Graph& g) {
            const Mat<Real>&gr = g.nodes_[id].grad, &y = g.val(id);
            Mat<Real>& da = g.grad_ref(a);
            for (size_t i = 0; i < gr.data.size(); ++i) da.data[i] += gr.data[i] * (Real(1) - y.data[i] * y.data[i]);
        };
        return id;
    }

    NodeId leaky_relu(NodeId a, Real slope) {
        Mat<Real> c = val(a);
        for (auto& v : c.data) v = v >= Real(0) ? v : slope * v;
        NodeId id = push(std::move(c), "leaky_relu", {a});
        nodes_[id].back = [id, a, slope](Graph& g) {
            const Mat<Real>&gr = g.nodes_[id].grad, &x = g.val(a);
            Mat<Real>& da = g.grad_ref(a);
            for (size_t i = 0; i < gr.data.size(); ++i) {
                da.data[i] += gr.data[i] * (x.data[i] >= Real(0) ? Real(1) : slope);
            }
        };
        return id;
    }

    // Stack a on top of b (same frame count).
    NodeId concat_rows(NodeId a, NodeId b) {
        const Mat<Real>&A = val(a), &B = val(b);
        if (A.cols != B.cols) throw data_error("concat_rows: frame counts differ");
        Mat<Real> c(A.rows + B.rows, A.cols);
        std::copy(A.data.begin(), A.data.end(), c.data.begin());
        std::copy(B.data.begin(), B.data.end(), c.data.begin() + A.data.size());
        NodeId id = push(std::move(c), "concat_rows", {a, b});
        nodes_[id].back = [id, a, b](Graph& g) {
            const Mat<Real>& gr = g.nodes_[id].grad;
            Mat<Real>&da = g.grad_ref(a), &db = g.grad_ref(b);
            const size_t na = da.data.size();
            for (size_t i = 0; i < na; ++i) da.data[i] += gr.data[i];
            for (size_t i = 0; i < db.data.size(); ++i) db.data[i] += gr.data[na + i];
        };
        return id;
    }

    // Gather columns of a (d x V) matrix by index; idx[j] == -1 yields a zero
    // column (used as the start-of-sequence embedding).
    NodeId gather_cols(NodeId a, std::vector<int> idx) {
        const Mat<Real>& A = val(a);
        Mat<Real> c(A.rows, static_cast<int>(idx.size()));
        for (size_t j = 0; j < idx.size(); ++j) {
            const int k = idx[j];
            if (k < -1 || k >= A.cols) throw data_error("gather_cols: index out of range");
            if (k < 0) continue;
            for (int r = 0; r < A.rows; ++r) c(r, static_cast<int>(j)) = A(r, k);
        }
        NodeId id = push(std::move(c), "gather_cols", {a});
        nodes_[id].back = [id, a, idx = std::move(idx)](Graph& g) {
            const Mat<Real>& gr = g.nodes_[id].grad;
            Mat<Real>& da = g.grad_ref(a);
            for (size_t j = 0; j < idx.size(); ++j) {
                const int k = idx[j];
                if (k < 0) continue;
                for (int r = 0; r < gr.rows; ++r) da(r, k) += gr(r, static_cast<int>(j));
            }
        };
        return id;
    }

    // ---- losses / reductions ----------------------------------------------

    // (1/(R*C)) * sum |a - b|, 1x1 output.
    NodeId l1_diff_mean(NodeId a, NodeId b) {
        const Mat<Real>&A = val(a), &B = val(b);
        if (!A.same_shape(B)) throw data_error("l1_diff_mean: shape mismatch");
        double s = 0.0;
        for (size_t i = 0; i < A.data.size(); ++i) s += std::abs(static_cast<double>(A.data[i]) - static_cast<double>(B.data[i]));
        Mat<Real> c(1, 1);
        c(0, 0) = static_cast<Real>(s / static_cast<double>(A.data.size()));
        NodeId id = push(std::move(c), "l1_diff_mean", {a, b});
        nodes_[id].back = [id, a, b](Graph& g) {
            const Real gs = g.nodes_[id].grad(0, 0);
            const Mat<Real>&A = g.val(a), &B = g.val(b);
            Mat<Real>&da = g.grad_ref(a), &db = g.grad_ref(b);
            const Real inv = Real(1) / static_cast<Real>(A.data.size());
            for (size_t i = 0; i < A.data.size(); ++i) {
                const Real d = A.data[i] - B.data[i];
                const Real sg = d > Real(0) ? Real(1) : (d < Real(0) ? Real(-1) : Real(0));
                da.data[i] += gs * inv * sg;
                db.data[i] -= gs * inv * sg;
            }
        };
        return id;
    }

    // Mean negative log-likelihood of targets under column-wise softmax of
    // the logits (V x T). 1x1 output.
    NodeId softmax_xent_mean(NodeId logits, std::vector<int> targets) {
        const Mat<Real>& L = val(logits);
        if (static_cast<int>(targets.size()) != L.cols) throw data_error("softmax_xent_mean: target count != frames");
        Mat<Real> probs(L.rows, L.cols);
        double nll = 0.0;
        for (int j = 0; j < L.cols; ++j) {
            if (targets[j] < 0 || targets[j] >= L.rows) throw data_error("softmax_xent_mean: target out of range");
            double mx = -1e300;
            for (int r = 0; r < L.rows; ++r) mx = std::max(mx, static_cast<double>(L(r, j)));
            double z = 0.0;
            for (int r = 0; r < L.rows; ++r) z += std::exp(static_cast<double>(L(r, j)) - mx);
            const double logz = std::log(z) + mx;
            for (int r = 0; r < L.rows; ++r) probs(r, j) = static_cast<Real>(std::exp(static_cast<double>(L(r, j)) - logz));
            nll -= static_cast<double>(L(targets[j], j)) - logz;
        }
        Mat<Real> c(1, 1);
        c(0, 0) = static_cast<Real>(nll / L.cols);
        NodeId id = push(std::move(c), "softmax_xent_mean", {logits});
        nodes_[id].back = [id, logits, probs = std::move(probs), targets = std::move(targets)](Graph& g) {
            const Real gs = g.nodes_[id].grad(0, 0);
            Mat<Real>& dl = g.grad_ref(logits);
            const Real inv = Real(1) / static_cast<Real>(probs.cols);
            for (int j = 0; j < probs.cols; ++j) {
                for (int r = 0; r < probs.rows; ++r) {
                    Real p = probs(r, j);
                    if (r == targets[j]) p -= Real(1);
                    dl(r, j) += gs * inv * p;
                }
            }
        };
        return id;
    }

    // sum(a .* w) with fixed weights, 1x1 output. Used to project a matrix
    // output to a scalar for gradient checks.
    NodeId weighted_sum(NodeId a, Mat<Real> w) {
        const Mat<Real>& A = val(a);
        if (!A.same_shape(w)) throw data_error("weighted_sum: shape mismatch");
        double s = 0.0;
        for (size_t i = 0; i < A.data.size(); ++i) s += static_cast<double>(A.data[i]) * static_cast<double>(w.data[i]);
        Mat<Real> c(1, 1);
        c(0, 0) = static_cast<Real>(s);
        NodeId id = push(std::move(c), "weighted_sum", {a});
        nodes_[id].back = [id, a, w = std::move(w)](Graph& g) {
            const Real gs = g.nodes_[id].grad(0, 0);
            Mat<Real>& da = g.grad_ref(a);
            for (size_t i = 0; i < w.data.size(); ++i) da.data[i] += gs * w.data[i];
        };
        return id;
    }

    // ---- fused sequence ops ------------------------------------------------

    struct GruParams {
        NodeId wr, ur, br, wz, uz, bz, wh, uh, bh;
    };

    // Full-sequence GRU, h0 defaults to zeros:
    //   r_t = sig(Wr x_t + Ur h_{t-1} + br)
    //   z_t = sig(Wz x_t + Uz h_{t-1} + bz)
    //   hc_t = tanh(Wh x_t + Uh (r_t . h_{t-1}) + bh)
    //   h_t = (1 - z_t) . h_{t-1} + z_t . hc_t
    // Output is [h_1 .. h_T] (hidden x T). Backward is BPTT over the cached
    // gate activations.
    NodeId gru(NodeId x, const GruParams& p, NodeId h0 = kNone);

    // Grouped dilated 1-D convolution (cross-correlation) with same-length
    // zero padding of d*(k-1)/2 per side. Weights are laid out as
    // (c_out x c_in_per_group*k); bias is (c_out x 1).
    NodeId conv1d(NodeId x, NodeId w, NodeId b, int kernel, int dilation, int groups);

    // Group normalization over (channels_in_group x T) per group, then a
    // per-channel affine. gamma/beta are (channels x 1).
    NodeId group_norm(NodeId x, NodeId gamma, NodeId beta, int groups, Real eps);

    // ---- execution ----------------------------------------------------------

    void backward(NodeId root) {
        if (val(root).rows != 1 || val(root).cols != 1) throw data_error("backward: root must be 1x1");
        grad_ref(root)(0, 0) = Real(1);
        for (NodeId i = root; i >= 0; --i) {
            Node& n = nodes_[i];
            if (!n.grad_live || !n.back) continue;
            n.back(*this);
        }
        for (NodeId i = root; i >= 0; --i) {
            if (nodes_[i].grad_live) require_finite(nodes_[i].grad, "backward gradient of " + nodes_[i].tag);
        }
    }

    void zero_grads() {
        for (auto& n : nodes_) {
            n.grad_live = false;
            n.grad.fill(Real(0));
        }
    }

    const Mat<Real>& val(NodeId id) const { return nodes_[id].value; }
    Real scalar_val(NodeId id) const { return nodes_[id].value(0, 0); }
    const Mat<Real>& grad(NodeId id) const { return nodes_[id].grad; }
    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Mat<Real> value;
        Mat<Real> grad;
        bool grad_live = false;
        std::string tag;
        std::function<void(Graph&)> back;
    };

    NodeId push(Mat<Real> v, std::string tag, std::initializer_list<NodeId>) {
        require_finite(v, tag);
        Node n;
        n.grad = Mat<Real>(v.rows, v.cols);
        n.value = std::move(v);
        n.tag = std::move(tag);
        nodes_.push_back(std::move(n));
        return static_cast<NodeId>(nodes_.size()) - 1;
    }

    Mat<Real>& grad_ref(NodeId id) {
        nodes_[id].grad_live = true;
        return nodes_[id].grad;
    }

    static void accumulate(Mat<Real>& dst, const Mat<Real>& src, Real scale) {
        for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += scale * src.data[i];
    }

    std::vector<Node> nodes_;
    std::unordered_map<const Param<Real>*, NodeId> param_nodes_;
};

// ---- fused op implementations ----------------------------------------------

template <typename Real>
typename Graph<Real>::NodeId Graph<Real>::gru(NodeId x, const GruParams& p, NodeId h0) {
    const Mat<Real>& X = val(x);
    const Mat<Real>&Wr = val(p.wr), &Ur = val(p.ur), &Br = val(p.br);
    const Mat<Real>&Wz = val(p.wz), &Uz = val(p.uz), &Bz = val(p.bz);
    const Mat<Real>&Wh = val(p.wh), &Uh = val(p.uh), &Bh = val(p.bh);
    const int hidden = Wr.rows;
    const int T = X.cols;
    if (Wr.cols != X.rows) throw data_error("gru: input dim mismatch");
    if (h0 != kNone && (val(h0).rows != hidden || val(h0).cols != 1)) throw data_error("gru: h0 must be hidden x 1");

    // Batched input projections, then the sequential recurrence.
    Mat<Real> Pr = mat_mul(Wr, X), Pz = mat_mul(Wz, X), Ph = mat_mul(Wh, X);
    Mat<Real> H(hidden, T + 1); // H.col(0) = h0
    if (h0 != kNone) {
        const Mat<Real>& h0v = val(h0);
        for (int r = 0; r < hidden; ++r) H(r, 0) = h0v(r, 0);
    }
    Mat<Real> R(hidden, T), Z(hidden, T), Hc(hidden, T), Q(hidden, T); // Q = r . h_prev
    {
        auto eUr = cemap(Ur), eUz = cemap(Uz), eUh = cemap(Uh);
        Eigen::Matrix<Real, Eigen::Dynamic, 1> hprev(hidden), tmp(hidden), q(hidden);
        for (int t = 0; t < T; ++t) {
            for (int r = 0; r < hidden; ++r) hprev(r) = H(r, t);
            tmp.noalias() = eUr * hprev;
            for (int r = 0; r < hidden; ++r) R(r, t) = Real(1) / (Real(1) + std::exp(-(Pr(r, t) + tmp(r) + Br(r, 0))));
            tmp.noalias() = eUz * hprev;
            for (int r = 0; r < hidden; ++r) Z(r, t) = Real(1) / (Real(1) + std::exp(-(Pz(r, t) + tmp(r) + Bz(r, 0))));
            for (int r = 0; r < hidden; ++r) q(r) = R(r, t) * hprev(r);
            for (int r = 0; r < hidden; ++r) Q(r, t) = q(r);
            tmp.noalias() = eUh * q;
            for (int r = 0; r < hidden; ++r) Hc(r, t) = std::tanh(Ph(r, t) + tmp(r) + Bh(r, 0));
            for (int r = 0; r < hidden; ++r) H(r, t + 1) = (Real(1) - Z(r, t)) * hprev(r) + Z(r, t) * Hc(r, t);
        }
    }
    Mat<Real> out(hidden, T);
    for (int t = 0; t < T; ++t) {
        for (int r = 0; r < hidden; ++r) out(r, t) = H(r, t + 1);
    }

    NodeId id = push(std::move(out), "gru", {});
    GruParams pc = p;
    nodes_[id].back = [id, x, pc, h0, H = std::move(H), R = std::move(R), Z = std::move(Z), Hc = std::move(Hc),
                       Q = std::move(Q)](Graph& g) {
        const Mat<Real>& gout = g.nodes_[id].grad;
        const Mat<Real>& X = g.val(x);
        const Mat<Real>&Wr = g.val(pc.wr), &Ur = g.val(pc.ur);
        const Mat<Real>&Wz = g.val(pc.wz), &Uz = g.val(pc.uz);
        const Mat<Real>&Wh = g.val(pc.wh), &Uh = g.val(pc.uh);
        const int hidden = Wr.rows;
        const int T = X.cols;

        // Pre-activation gate gradients per frame, filled right-to-left.
        Mat<Real> dR(hidden, T), dZ(hidden, T), dA(hidden, T); // dA: tanh pre-activation
        Eigen::Matrix<Real, Eigen::Dynamic, 1> carry(hidden), tmp(hidden), dq(hidden);
        carry.setZero();
        auto eUr = cemap(Ur), eUz = cemap(Uz), eUh = cemap(Uh);
        for (int t = T - 1; t >= 0; --t) {
            for (int r = 0; r < hidden; ++r) carry(r) += gout(r, t);
            for (int r = 0; r < hidden; ++r) {
                const Real gh = carry(r);
                const Real hprev = H(r, t);
                dZ(r, t) = gh * (Hc(r, t) - hprev) * Z(r, t) * (Real(1) - Z(r, t));
                dA(r, t) = gh * Z(r, t) * (Real(1) - Hc(r, t) * Hc(r, t));
            }
            // dq = Uh^T dA_t ; dr = dq . hprev . r . (1-r)
            for (int r = 0; r < hidden; ++r) tmp(r) = dA(r, t);
            dq.noalias() = eUh.transpose() * tmp;
            for (int r = 0; r < hidden; ++r) dR(r, t) = dq(r) * H(r, t) * R(r, t) * (Real(1) - R(r, t));
            // carry into h_{t-1}
            for (int r = 0; r < hidden; ++r) carry(r) = carry(r) * (Real(1) - Z(r, t)) + dq(r) * R(r, t);
            for (int r = 0; r < hidden; ++r) tmp(r) = dR(r, t);
            carry.noalias() += eUr.transpose() * tmp;
            for (int r = 0; r < hidden; ++r) tmp(r) = dZ(r, t);
            carry.noalias() += eUz.transpose() * tmp;
        }

        // Batched parameter and input gradients.
        Mat<Real> Hprev(hidden, T); // [h_0 .. h_{T-1}]
        for (int t = 0; t < T; ++t) {
            for (int r = 0; r < hidden; ++r) Hprev(r, t) = H(r, t);
        }
        emap(g.grad_ref(pc.wr)).noalias() += cemap(dR) * cemap(X).transpose();
        emap(g.grad_ref(pc.wz)).noalias() += cemap(dZ) * cemap(X).transpose();
        emap(g.grad_ref(pc.wh)).noalias() += cemap(dA) * cemap(X).transpose();
        emap(g.grad_ref(pc.ur)).noalias() += cemap(dR) * cemap(Hprev).transpose();
        emap(g.grad_ref(pc.uz)).noalias() += cemap(dZ) * cemap(Hprev).transpose();
        emap(g.grad_ref(pc.uh)).noalias() += cemap(dA) * cemap(Q).transpose();
        {
            Mat<Real>&dbr = g.grad_ref(pc.br), &dbz = g.grad_ref(pc.bz), &dbh = g.grad_ref(pc.bh);
            for (int t = 0; t < T; ++t) {
                for (int r = 0; r < hidden; ++r) {
                    dbr(r, 0) += dR(r, t);
                    dbz(r, 0) += dZ(r, t);
                    dbh(r, 0) += dA(r, t);
                }
            }
        }
        {
            Mat<Real>& dx = g.grad_ref(x);
            emap(dx).noalias() += cemap(Wr).transpose() * cemap(dR);
            emap(dx).noalias() += cemap(Wz).transpose() * cemap(dZ);
            emap(dx).noalias() += cemap(Wh).transpose() * cemap(dA);
        }
        if (h0 != kNone) {
            Mat<Real>& dh0 = g.grad_ref(h0);
            for (int r = 0; r < hidden; ++r) dh0(r, 0) += carry(r);
        }
    };
    return id;
}

template <typename Real>
typename Graph<Real>::NodeId Graph<Real>::conv1d(NodeId x, NodeId w, NodeId b, int kernel, int dilation, int groups) {
    const Mat<Real>&X = val(x), &W = val(w), &B = val(b);
    const int cin = X.rows, T = X.cols, cout = W.rows;
    if (kernel % 2 == 0) throw data_error("conv1d: kernel must be odd");
    if (cin % groups != 0 || cout % groups != 0) throw data_error("conv1d: channels not divisible by groups");
    const int cpg_in = cin / groups, cpg_out = cout / groups;
    if (W.cols != cpg_in * kernel) throw data_error("conv1d: weight shape mismatch");
    if (B.rows != cout || B.cols != 1) throw data_error("conv1d: bias shape mismatch");
    const int center = (kernel - 1) / 2;

    Mat<Real> Y(cout, T);
    for (int oc = 0; oc < cout; ++oc) {
        const int grp = oc / cpg_out;
        for (int t = 0; t < T; ++t) {
            Real acc = B(oc, 0);
            for (int icl = 0; icl < cpg_in; ++icl) {
                const int ic = grp * cpg_in + icl;
                for (int j = 0; j < kernel; ++j) {
                    const int s = t + (j - center) * dilation;
                    if (s >= 0 && s < T) acc += W(oc, icl * kernel + j) * X(ic, s);
                }
            }
            Y(oc, t) = acc;
        }
    }
    NodeId id = push(std::move(Y), "conv1d", {});
    nodes_[id].back = [id, x, w, b, kernel, dilation, center, cpg_in, cpg_out](Graph& g) {
        const Mat<Real>& gr = g.nodes_[id].grad;
        const Mat<Real>&X = g.val(x), &W = g.val(w);
        const int T = X.cols, cout = gr.rows;
        Mat<Real>&dx = g.grad_ref(x), &dw = g.grad_ref(w), &db = g.grad_ref(b);
        for (int oc = 0; oc < cout; ++oc) {
            const int grp = oc / cpg_out;
            for (int t = 0; t < T; ++t) {
                const Real go = gr(oc, t);
                db(oc, 0) += go;
                for (int icl = 0; icl < cpg_in; ++icl) {
                    const int ic = grp * cpg_in + icl;
                    for (int j = 0; j < kernel; ++j) {
                        const int s = t + (j - center) * dilation;
                        if (s >= 0 && s < T) {
                            dw(oc, icl * kernel + j) += go * X(ic, s);
                            dx(ic, s) += go * W(oc, icl * kernel + j);
                        }
                    }
                }
            }
        }
    };
    return id;
}

template <typename Real>
typename Graph<Real>::NodeId Graph<Real>::group_norm(NodeId x, NodeId gamma, NodeId beta, int groups, Real eps) {
    const Mat<Real>&X = val(x), &Ga = val(gamma), &Be = val(beta);
    const int C = X.rows, T = X.cols;
    if (C % groups != 0) throw data_error("group_norm: channels not divisible by groups");
    if (Ga.rows != C || Ga.cols != 1 || Be.rows != C || Be.cols != 1) throw data_error("group_norm: affine shape mismatch");
    const int cpg = C / groups;

    Mat<Real> xhat(C, T);
    std::vector<Real> inv_std(groups);
    for (int gi = 0; gi < groups; ++gi) {
        double mean = 0.0;
        for (int c = gi * cpg; c < (gi + 1) * cpg; ++c) {
            for (int t = 0; t < T; ++t) mean += static_cast<double>(X(c, t));
        }
        const double n = static_cast<double>(cpg) * T;
        mean /= n;
        double var = 0.0;
        for (int c = gi * cpg; c < (gi + 1) * cpg; ++c) {
            for (int t = 0; t < T; ++t) {
                const double d = static_cast<double>(X(c, t)) - mean;
                var += d * d;
            }
        }
        var /= n;
        const Real inv = static_cast<Real>(1.0 / std::sqrt(var + static_cast<double>(eps)));
        inv_std[gi] = inv;
        for (int c = gi * cpg; c < (gi + 1) * cpg; ++c) {
            for (int t = 0; t < T; ++t) xhat(c, t) = (X(c, t) - static_cast<Real>(mean)) * inv;
        }
    }
    Mat<Real> Y(C, T);
    for (int c = 0; c < C; ++c) {
        for (int t = 0; t < T; ++t) Y(c, t) = Ga(c, 0) * xhat(c, t) + Be(c, 0);
    }
    NodeId id = push(std::move(Y), "group_norm", {});
    nodes_[id].back = [id, x, gamma, beta, groups, cpg, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& g) {
        const Mat<Real>& gr = g.nodes_[id].grad;
        const Mat<Real>& Ga = g.val(gamma);
        const int C = gr.rows, T = gr.cols;
        Mat<Real>&dx = g.grad_ref(x), &dga = g.grad_ref(gamma), &dbe = g.grad_ref(beta);
        for (int c = 0; c < C; ++c) {
            double sg = 0.0, sgx = 0.0;
            for (int t = 0; t < T; ++t) {
                sg += static_cast<double>(gr(c, t));
                sgx += static_cast<double>(gr(c, t)) * static_cast<double>(xhat(c, t));
            }
            dbe(c, 0) += static_cast<Real>(sg);
            dga(c, 0) += static_cast<Real>(sgx);
        }
        const double n = static_cast<double>(cpg) * T;
        for (int gi = 0; gi < groups; ++gi) {
            // dxhat = gr * gamma ; dx = inv_std * (dxhat - mean(dxhat) - xhat * mean(dxhat . xhat))
            double s1 = 0.0, s2 = 0.0;
            for (int c = gi * cpg; c < (gi + 1) * cpg; ++c) {
                for (int t = 0; t < T; ++t) {
                    const double dxh = static_cast<double>(gr(c, t)) * static_cast<double>(Ga(c, 0));
                    s1 += dxh;
                    s2 += dxh * static_cast<double>(xhat(c, t));
                }
            }
            s1 /= n;
            s2 /= n;
            const double inv = static_cast<double>(inv_std[gi]);
            for (int c = gi * cpg; c < (gi + 1) * cpg; ++c) {
                for (int t = 0; t < T; ++t) {
                    const double dxh = static_cast<double>(gr(c, t)) * static_cast<double>(Ga(c, 0));
                    dx(c, t) += static_cast<Real>(inv * (dxh - s1 - static_cast<double>(xhat(c, t)) * s2));
                }
            }
        }
    };
    return id;
}

} // namespace svgen
