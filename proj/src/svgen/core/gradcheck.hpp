#pragma once

#include <functional>
#include <string>
#include <vector>

#include "svgen/core/graph.hpp"

namespace svgen {

// Central finite-difference verification of backward rules, run in 64-bit.
//
// `build` constructs a fresh forward pass over the current parameter values
// and the given input node, and returns a scalar (1x1) loss node. The checker
// compares the tape gradients of every parameter element and every input
// element against (f(v+eps) - f(v-eps)) / (2 eps).

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_location;
    int checked = 0;

    bool pass(double tol) const { return checked > 0 && max_rel_err < tol; }
};

namespace detail {

inline double rel_err(double analytic, double numeric) {
    const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
    return std::abs(analytic - numeric) / denom;
}

} // namespace detail

inline GradCheckReport check_gradients(
    ParamStore<double>& params, Mat<double>& x,
    const std::function<Graph<double>::NodeId(Graph<double>&, Graph<double>::NodeId)>& build,
    double eps = 1e-5,
    const std::function<void(ParamStore<double>&)>& corrupt_analytic = {}) {
    auto eval = [&]() {
        Graph<double> g;
        auto xid = g.input(x);
        return g.scalar_val(build(g, xid));
    };

    // Analytic gradients from one tape sweep. `corrupt_analytic` is a test
    // fixture hook that emulates a broken backward rule.
    params.zero_grads();
    Graph<double> g;
    auto xid = g.input(x);
    auto loss = build(g, xid);
    g.backward(loss);
    if (corrupt_analytic) corrupt_analytic(params);
    Mat<double> x_analytic = g.grad(xid);

    GradCheckReport rep;
    auto probe = [&](double& slot, double analytic, const std::string& where) {
        const double keep = slot;
        slot = keep + eps;
        const double fp = eval();
        slot = keep - eps;
        const double fm = eval();
        slot = keep;
        const double numeric = (fp - fm) / (2.0 * eps);
        const double e = detail::rel_err(analytic, numeric);
        ++rep.checked;
        if (e > rep.max_rel_err) {
            rep.max_rel_err = e;
            rep.worst_location = where;
        }
    };

    for (size_t pi = 0; pi < params.size(); ++pi) {
        Param<double>& p = params.at(pi);
        for (size_t i = 0; i < p.value.size(); ++i) {
            probe(p.value.data[i], p.grad.data[i], p.name + "[" + std::to_string(i) + "]");
        }
    }
    for (size_t i = 0; i < x.size(); ++i) {
        probe(x.data[i], x_analytic.data[i], "input[" + std::to_string(i) + "]");
    }
    params.zero_grads();
    return rep;
}

} // namespace svgen
