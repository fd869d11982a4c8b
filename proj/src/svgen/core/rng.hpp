#pragma once

#include <array>
#include <cstdint>

#include "svgen/core/mat.hpp"

namespace svgen {

// Deterministic PRNG used everywhere randomness is needed.
//
// Algorithm: xoshiro256++ (Blackman & Vigna), state seeded with splitmix64.
// Uniform doubles take the top 53 bits; normal variates use Box-Muller with
// a cached spare. The integer stream is identical across platforms; derived
// floating-point draws additionally depend on libm (log/cos/sin).
class Rng {
public:
    explicit Rng(uint64_t seed) { reseed(seed); }

    void reseed(uint64_t seed);

    uint64_t next_u64();

    // [0, 1), 53-bit resolution
    double uniform01();

    // N(0, 1)
    double normal();

    // uniform integer in [0, n), n >= 1
    int below(int n);

    struct State {
        std::array<uint64_t, 4> s;
        bool has_spare;
        double spare;
    };
    State state() const { return {s_, has_spare_, spare_}; }
    void set_state(const State& st) {
        s_ = st.s;
        has_spare_ = st.has_spare;
        spare_ = st.spare;
    }

private:
    std::array<uint64_t, 4> s_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// rows x cols matrix of i.i.d. N(0,1) draws; advances rng.
template <typename Real>
Mat<Real> sample_gaussian(Rng& rng, int rows, int cols) {
    if (rows < 1 || cols < 1) throw data_error("sample_gaussian: dims must be >= 1");
    Mat<Real> m(rows, cols);
    for (auto& v : m.data) v = static_cast<Real>(rng.normal());
    return m;
}

// Seeded Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
        int j = rng.below(i + 1);
        std::swap(v[i], v[j]);
    }
}

// Mix two 64-bit values into a fresh seed (for derived streams).
uint64_t mix_seed(uint64_t a, uint64_t b);

} // namespace svgen
