#include "svgen/model/gradcheck_suite.hpp"

#include "svgen/core/gradcheck.hpp"
#include "svgen/layers/layers.hpp"
#include "svgen/model/began.hpp"

namespace svgen {

namespace {

Mat64 random_mat(int r, int c, Rng& rng, double scale = 1.0) {
    Mat64 m(r, c);
    for (auto& v : m.data) v = rng.normal() * scale;
    return m;
}

using Build = std::function<Graph<double>::NodeId(Graph<double>&, Graph<double>::NodeId)>;

SuiteResult run_one(const std::string& name, ParamStore<double>& ps, Mat64& x, const Build& build, double tol,
                    double perturb = 0.0) {
    std::function<void(ParamStore<double>&)> corrupt;
    if (perturb != 0.0) {
        corrupt = [perturb](ParamStore<double>& p) {
            if (p.size() > 0 && p.at(0).grad.size() > 0) p.at(0).grad.data[0] += perturb;
        };
    }
    auto rep = check_gradients(ps, x, build, 1e-5, corrupt);
    return {name, rep.max_rel_err, rep.pass(tol)};
}

} // namespace

std::vector<SuiteResult> run_gradcheck_suite(const std::vector<int>& frame_counts, double tol, double perturb) {
    std::vector<SuiteResult> results;
    Rng rng(90210);

    for (int T : frame_counts) {
        const std::string suffix = " (T=" + std::to_string(T) + ")";
        {
            ParamStore<double> ps;
            GruLayer<double> gru(ps, "gru", 3, 4, rng);
            Mat64 x = random_mat(3, T, rng);
            Mat64 proj = random_mat(4, T, rng);
            results.push_back(run_one("gru" + suffix, ps, x,
                                      [&](Graph<double>& g, auto xid) { return g.weighted_sum(gru.forward(g, xid), proj); },
                                      tol));
        }
        {
            ParamStore<double> ps;
            Conv1dLayer<double> conv(ps, "conv", 4, 8, 3, 2, 4, rng);
            Mat64 x = random_mat(4, T, rng);
            Mat64 proj = random_mat(8, T, rng);
            results.push_back(run_one("grouped_dilated_conv" + suffix, ps, x,
                                      [&](Graph<double>& g, auto xid) { return g.weighted_sum(conv.forward(g, xid), proj); },
                                      tol));
        }
        {
            ParamStore<double> ps;
            GroupNormLayer<double> gn(ps, "norm", 4, 2);
            ps.get("norm.gamma").value = random_mat(4, 1, rng, 0.7);
            ps.get("norm.beta").value = random_mat(4, 1, rng, 0.5);
            Mat64 x = random_mat(4, T, rng);
            Mat64 proj = random_mat(4, T, rng);
            results.push_back(run_one("group_norm" + suffix, ps, x,
                                      [&](Graph<double>& g, auto xid) { return g.weighted_sum(gn.forward(g, xid), proj); },
                                      tol));
        }
        {
            ParamStore<double> ps;
            Mat64 x = random_mat(4, T, rng);
            Mat64 proj = random_mat(4, T, rng);
            results.push_back(run_one("leaky_relu" + suffix, ps, x,
                                      [&](Graph<double>& g, auto xid) {
                                          return g.weighted_sum(g.leaky_relu(xid, 0.01), proj);
                                      },
                                      tol));
        }
        {
            ParamStore<double> ps;
            DenseLayer<double> dense(ps, "linear", 4, 6, rng);
            Mat64 x = random_mat(4, T, rng);
            Mat64 proj = random_mat(6, T, rng);
            results.push_back(run_one("linear" + suffix, ps, x,
                                      [&](Graph<double>& g, auto xid) { return g.weighted_sum(dense.forward(g, xid), proj); },
                                      tol));
        }
        {
            ParamStore<double> ps;
            G3Block<double> block(ps, "block", 4, rng);
            Mat64 x = random_mat(4, T, rng, 0.5);
            Mat64 proj = random_mat(4, T, rng);
            results.push_back(run_one("g3_block" + suffix, ps, x,
                                      [&](Graph<double>& g, auto xid) { return g.weighted_sum(block.forward(g, xid), proj); },
                                      tol));
        }
        {
            // Assembled generator and discriminator at small width.
            G3BeganConfig cfg;
            cfg.noise_dim = 4;
            cfg.width = 8;
            cfg.mel_bins = 6;
            cfg.mode = CondMode::kFree;
            G3BeganModel<double> model(cfg, rng);
            Mat64 z = random_mat(cfg.noise_dim, T, rng);
            Mat64 proj = random_mat(cfg.mel_bins, T, rng);
            results.push_back(run_one("generator_full" + suffix, model.g_params, z,
                                      [&](Graph<double>& g, auto zid) {
                                          return g.weighted_sum(model.gen_forward(g, zid), proj);
                                      },
                                      tol));
            Mat64 m = random_mat(cfg.mel_bins, T, rng, 0.5);
            results.push_back(run_one("discriminator_full" + suffix, model.d_params, m,
                                      [&](Graph<double>& g, auto mid) {
                                          return g.l1_diff_mean(model.disc_forward(g, mid), mid);
                                      },
                                      tol));
        }
    }

    if (perturb != 0.0) {
        ParamStore<double> ps;
        DenseLayer<double> dense(ps, "fixture", 3, 3, rng);
        Mat64 x = random_mat(3, 4, rng);
        Mat64 proj = random_mat(3, 4, rng);
        results.push_back(run_one("perturbed_backward_fixture", ps, x,
                                  [&](Graph<double>& g, auto xid) { return g.weighted_sum(dense.forward(g, xid), proj); },
                                  tol, perturb));
    }
    return results;
}

} // namespace svgen
