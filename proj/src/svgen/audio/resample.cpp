#include "svgen/audio/resample.hpp"

#include <cmath>
#include <numeric>

namespace svgen {

namespace {

constexpr int kHalfWidth = 32; // zero crossings per side at the lower rate

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    const double px = 3.14159265358979323846 * x;
    return std::sin(px) / px;
}

} // namespace

AudioClip resample(const AudioClip& in, int target_rate) {
    if (in.sample_rate == target_rate) return in;
    if (in.samples.empty()) return {std::vector<float>{}, target_rate};

    const int g = std::gcd(in.sample_rate, target_rate);
    const int64_t up = target_rate / g;   // L
    const int64_t down = in.sample_rate / g; // M
    const int64_t n_in = static_cast<int64_t>(in.samples.size());
    const int64_t n_out = (n_in * up + down - 1) / down;

    // Low-pass at the narrower of the two Nyquists.
    const double scale = std::min(1.0, static_cast<double>(target_rate) / in.sample_rate);
    const double support = kHalfWidth / scale;

    AudioClip out;
    out.sample_rate = target_rate;
    out.samples.resize(static_cast<size_t>(n_out));
    for (int64_t j = 0; j < n_out; ++j) {
        const int64_t t_num = j * down;
        const int64_t i0 = t_num / up;
        const double frac = static_cast<double>(t_num % up) / static_cast<double>(up);
        double acc = 0.0;
        const int64_t lo = i0 - static_cast<int64_t>(support);
        const int64_t hi = i0 + static_cast<int64_t>(support) + 1;
        for (int64_t i = std::max<int64_t>(0, lo); i <= std::min(n_in - 1, hi); ++i) {
            const double u = (static_cast<double>(i - i0) - frac) * scale;
            if (std::abs(u) >= kHalfWidth) continue;
            const double w = 0.5 * (1.0 + std::cos(3.14159265358979323846 * u / kHalfWidth));
            acc += in.samples[static_cast<size_t>(i)] * scale * sinc(u) * w;
        }
        out.samples[static_cast<size_t>(j)] = static_cast<float>(acc);
    }
    return out;
}

} // namespace svgen
