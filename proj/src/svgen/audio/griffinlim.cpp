#include "svgen/audio/griffinlim.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace svgen {

namespace {

// Nonnegative least squares for one frame: min ||A x - y||, x >= 0.
// Greedy active-set with column-norm-scaled selection; negative coefficients
// are pruned Lawson-Hanson style.
void nnls_frame(const Eigen::MatrixXd& a, const Eigen::VectorXd& col_inv_norm, const Eigen::VectorXd& y,
                Eigen::VectorXd& x) {
    const int bands = static_cast<int>(a.rows());
    const int bins = static_cast<int>(a.cols());
    x.setZero(bins);
    if (y.lpNorm<Eigen::Infinity>() <= 0.0) return;

    std::vector<int> active;
    Eigen::VectorXd r = y;
    const double tol = 1e-8 * y.norm();
    const int max_atoms = 2 * bands;

    for (int iter = 0; iter < max_atoms; ++iter) {
        // Most correlated unselected bin, after scaling away column norms.
        Eigen::VectorXd w = a.transpose() * r;
        int best = -1;
        double best_score = tol;
        for (int j = 0; j < bins; ++j) {
            const double score = w(j) * col_inv_norm(j);
            if (score > best_score && x(j) == 0.0) {
                bool in = false;
                for (int k : active) {
                    if (k == j) { in = true; break; }
                }
                if (!in) {
                    best = j;
                    best_score = score;
                }
            }
        }
        if (best < 0) break;
        active.push_back(best);

        // Solve on the active set; prune negatives until feasible.
        while (!active.empty()) {
            Eigen::MatrixXd ap(bands, active.size());
            for (size_t k = 0; k < active.size(); ++k) ap.col(static_cast<int>(k)) = a.col(active[k]);
            Eigen::VectorXd sol = ap.colPivHouseholderQr().solve(y);
            int worst = -1;
            for (int k = 0; k < sol.size(); ++k) {
                if (sol(k) < 0.0 && (worst < 0 || sol(k) < sol(worst))) worst = k;
            }
            if (worst < 0) {
                x.setZero();
                for (size_t k = 0; k < active.size(); ++k) x(active[k]) = sol(static_cast<int>(k));
                break;
            }
            active.erase(active.begin() + worst);
            if (active.empty()) x.setZero();
        }
        r = y - a * x;
        if (r.norm() <= tol) break;
    }
}

} // namespace

Mat64 mel_power_to_linear_power(const Mat64& mel_power) {
    const Mat64& fb = mel_filterbank();
    Eigen::MatrixXd a(fb.rows, fb.cols);
    for (int i = 0; i < fb.rows; ++i) {
        for (int j = 0; j < fb.cols; ++j) a(i, j) = fb(i, j);
    }
    Eigen::VectorXd col_inv_norm(fb.cols);
    for (int j = 0; j < fb.cols; ++j) {
        const double n = a.col(j).norm();
        col_inv_norm(j) = n > 0.0 ? 1.0 / n : 0.0;
    }

    Mat64 lin(kBins, mel_power.cols);
    Eigen::VectorXd y(fb.rows), x(fb.cols);
    for (int t = 0; t < mel_power.cols; ++t) {
        for (int m = 0; m < fb.rows; ++m) y(m) = std::max(0.0, mel_power(m, t));
        nnls_frame(a, col_inv_norm, y, x);
        for (int b = 0; b < kBins; ++b) lin(b, t) = std::max(0.0, x(b));
    }
    return lin;
}

AudioClip griffin_lim(const MelSpec& mel, int iters) {
    if (iters < 1) throw data_error("griffin_lim: iters must be >= 1");
    const Mat64 logmel = denormalize_log_mel(mel);
    Mat64 mel_power(logmel.rows, logmel.cols);
    for (size_t i = 0; i < logmel.data.size(); ++i) {
        mel_power.data[i] = std::max(0.0, std::exp(logmel.data[i]) - kLogFloorPower);
    }
    const Mat64 lin_power = mel_power_to_linear_power(mel_power);

    const int T = lin_power.cols;
    Mat64 mag(kBins, T);
    for (size_t i = 0; i < mag.data.size(); ++i) mag.data[i] = std::sqrt(lin_power.data[i]);

    const int64_t n_out = static_cast<int64_t>(T) * kHop;
    ComplexSpec spec;
    spec.bins = kBins;
    spec.frames = T;
    spec.data.resize(static_cast<size_t>(kBins) * T);
    // Zero initial phase keeps the whole reconstruction deterministic.
    for (int b = 0; b < kBins; ++b) {
        for (int t = 0; t < T; ++t) spec.at(b, t) = {mag(b, t), 0.0};
    }
    for (int it = 0; it < iters; ++it) {
        std::vector<float> wave = istft(spec, n_out);
        ComplexSpec est = stft(wave);
        for (int b = 0; b < kBins; ++b) {
            for (int t = 0; t < T; ++t) {
                const std::complex<double> v = est.at(b, t);
                const double m = std::abs(v);
                spec.at(b, t) = (m > 1e-12) ? std::complex<double>(mag(b, t) * v.real() / m, mag(b, t) * v.imag() / m)
                                            : std::complex<double>(mag(b, t), 0.0);
            }
        }
    }

    AudioClip out;
    out.sample_rate = kSampleRate;
    out.samples = istft(spec, n_out);
    for (float& s : out.samples) s = std::clamp(s, -1.0f, 1.0f);
    return out;
}

} // namespace svgen
