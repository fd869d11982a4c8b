#pragma once

#include <complex>
#include <vector>

#include "svgen/audio/wav.hpp"
#include "svgen/core/mat.hpp"

namespace svgen {

constexpr int kNFft = 2048;
constexpr int kHop = 512;
constexpr int kBins = kNFft / 2 + 1; // 1025

// One-sided complex spectrogram, bins x frames.
struct ComplexSpec {
    int bins = 0, frames = 0;
    std::vector<std::complex<double>> data; // row-major (bin, frame)

    std::complex<double>& at(int b, int t) { return data[static_cast<size_t>(b) * frames + t]; }
    const std::complex<double>& at(int b, int t) const { return data[static_cast<size_t>(b) * frames + t]; }
};

// In-place radix-2 FFT, n a power of two. inverse=true applies conjugation
// and 1/n scaling.
void fft(std::vector<std::complex<double>>& a, bool inverse);

// Centered STFT with a periodic Hann window and zero padding outside the
// signal. Frame t is centered at t*kHop; the frame count is
// ceil(n_samples / kHop).
ComplexSpec stft(const std::vector<float>& samples);

// Weighted overlap-add inverse with the same window, normalized by the
// accumulated squared window. Returns n_out samples (pass frames*kHop for a
// full-length reconstruction).
std::vector<float> istft(const ComplexSpec& spec, int64_t n_out);

int stft_frame_count(int64_t n_samples);

} // namespace svgen
