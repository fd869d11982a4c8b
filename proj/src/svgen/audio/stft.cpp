#include "svgen/audio/stft.hpp"

#include <cmath>

namespace svgen {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> hann_window(int n) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / n)); // periodic
    return w;
}

} // namespace

void fft(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw data_error("fft: length must be a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (auto& v : a) v /= static_cast<double>(n);
    }
}

int stft_frame_count(int64_t n_samples) {
    return static_cast<int>((n_samples + kHop - 1) / kHop);
}

ComplexSpec stft(const std::vector<float>& samples) {
    if (samples.empty()) throw data_error("stft: empty audio");
    static const std::vector<double> window = hann_window(kNFft);
    const int frames = stft_frame_count(static_cast<int64_t>(samples.size()));
    ComplexSpec spec;
    spec.bins = kBins;
    spec.frames = frames;
    spec.data.assign(static_cast<size_t>(kBins) * frames, {0.0, 0.0});

    std::vector<std::complex<double>> buf(kNFft);
    const int64_t n = static_cast<int64_t>(samples.size());
    for (int t = 0; t < frames; ++t) {
        const int64_t center = static_cast<int64_t>(t) * kHop;
        for (int i = 0; i < kNFft; ++i) {
            const int64_t s = center - kNFft / 2 + i;
            const double x = (s >= 0 && s < n) ? samples[static_cast<size_t>(s)] : 0.0;
            buf[i] = {x * window[i], 0.0};
        }
        fft(buf, false);
        for (int b = 0; b < kBins; ++b) spec.at(b, t) = buf[b];
    }
    return spec;
}

std::vector<float> istft(const ComplexSpec& spec, int64_t n_out) {
    static const std::vector<double> window = hann_window(kNFft);
    std::vector<double> acc(static_cast<size_t>(n_out), 0.0);
    std::vector<double> wsum(static_cast<size_t>(n_out), 0.0);
    std::vector<std::complex<double>> buf(kNFft);
    for (int t = 0; t < spec.frames; ++t) {
        for (int b = 0; b < kBins; ++b) buf[b] = spec.at(b, t);
        for (int b = kBins; b < kNFft; ++b) buf[b] = std::conj(spec.at(kNFft - b, t));
        fft(buf, true);
        const int64_t center = static_cast<int64_t>(t) * kHop;
        for (int i = 0; i < kNFft; ++i) {
            const int64_t s = center - kNFft / 2 + i;
            if (s < 0 || s >= n_out) continue;
            acc[static_cast<size_t>(s)] += buf[i].real() * window[i];
            wsum[static_cast<size_t>(s)] += window[i] * window[i];
        }
    }
    std::vector<float> out(static_cast<size_t>(n_out));
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<float>(acc[i] / (wsum[i] + 1e-12));
    }
    return out;
}

} // namespace svgen
