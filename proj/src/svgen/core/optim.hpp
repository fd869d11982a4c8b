#pragma once

#include <cmath>

#include "svgen/core/param.hpp"

namespace svgen {

// Bias-corrected Adam update, in place. Gradients are zeroed afterwards.
// Throws numeric_error naming the parameter if any gradient is non-finite.
template <typename Real>
void adam_step(ParamStore<Real>& params, double lr, double beta1, double beta2, double eps, int64_t step) {
    if (step < 1) throw data_error("adam_step: step must be >= 1");
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (size_t i = 0; i < params.size(); ++i) {
        Param<Real>& p = params.at(i);
        if (!all_finite(p.grad)) throw numeric_error("adam_step: non-finite gradient for " + p.name);
        for (size_t j = 0; j < p.value.size(); ++j) {
            const double g = static_cast<double>(p.grad.data[j]);
            const double m = beta1 * static_cast<double>(p.m1.data[j]) + (1.0 - beta1) * g;
            const double v = beta2 * static_cast<double>(p.m2.data[j]) + (1.0 - beta2) * g * g;
            p.m1.data[j] = static_cast<Real>(m);
            p.m2.data[j] = static_cast<Real>(v);
            const double mh = m / bc1;
            const double vh = v / bc2;
            p.value.data[j] -= static_cast<Real>(lr * mh / (std::sqrt(vh) + eps));
            p.grad.data[j] = Real(0);
        }
    }
}

// Global L2 gradient norm clip over the whole store.
// Returns the pre-clip norm.
template <typename Real>
double clip_grad_norm(ParamStore<Real>& params, double max_norm) {
    if (max_norm <= 0) throw data_error("clip_grad_norm: max_norm must be > 0");
    double sq = 0.0;
    for (size_t i = 0; i < params.size(); ++i) {
        for (Real g : params.at(i).grad.data) sq += static_cast<double>(g) * static_cast<double>(g);
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const Real scale = static_cast<Real>(max_norm / norm);
        for (size_t i = 0; i < params.size(); ++i) {
            for (Real& g : params.at(i).grad.data) g *= scale;
        }
    }
    return norm;
}

} // namespace svgen
