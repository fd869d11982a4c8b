#include "svgen/audio/mel.hpp"

#include <cmath>

namespace svgen {

namespace {

// Slaney mel scale: linear below 1 kHz, logarithmic above.
double hz_to_mel(double f) {
    const double f_sp = 200.0 / 3.0;
    const double min_log_hz = 1000.0;
    const double min_log_mel = min_log_hz / f_sp;
    const double logstep = std::log(6.4) / 27.0;
    if (f < min_log_hz) return f / f_sp;
    return min_log_mel + std::log(f / min_log_hz) / logstep;
}

double mel_to_hz(double m) {
    const double f_sp = 200.0 / 3.0;
    const double min_log_hz = 1000.0;
    const double min_log_mel = min_log_hz / f_sp;
    const double logstep = std::log(6.4) / 27.0;
    if (m < min_log_mel) return m * f_sp;
    return min_log_hz * std::exp(logstep * (m - min_log_mel));
}

std::vector<double> mel_grid_hz() {
    const double mel_lo = hz_to_mel(kFMin), mel_hi = hz_to_mel(kFMax);
    std::vector<double> pts(kMelBins + 2);
    for (int i = 0; i < kMelBins + 2; ++i) {
        pts[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (kMelBins + 1));
    }
    return pts;
}

Mat64 build_filterbank() {
    const auto pts = mel_grid_hz();
    Mat64 fb(kMelBins, kBins);
    for (int m = 0; m < kMelBins; ++m) {
        const double f_lo = pts[m], f_c = pts[m + 1], f_hi = pts[m + 2];
        const double enorm = 2.0 / (f_hi - f_lo); // area normalization
        for (int b = 0; b < kBins; ++b) {
            const double f = static_cast<double>(b) * kSampleRate / kNFft;
            double w = 0.0;
            if (f > f_lo && f < f_hi) {
                w = (f <= f_c) ? (f - f_lo) / (f_c - f_lo) : (f_hi - f) / (f_hi - f_c);
            }
            fb(m, b) = w * enorm;
        }
    }
    return fb;
}

} // namespace

const Mat64& mel_filterbank() {
    static const Mat64 fb = build_filterbank();
    return fb;
}

std::vector<double> mel_band_centers() {
    const auto pts = mel_grid_hz();
    return {pts.begin() + 1, pts.end() - 1};
}

Mat64 log_mel_spectrogram(const AudioClip& clip) {
    if (clip.samples.empty()) throw data_error("log_mel_spectrogram: empty audio");
    if (clip.sample_rate != kSampleRate) throw data_error("log_mel_spectrogram: clip must be at 22050 Hz");
    const ComplexSpec spec = stft(clip.samples);
    const Mat64& fb = mel_filterbank();
    Mat64 out(kMelBins, spec.frames);
    for (int t = 0; t < spec.frames; ++t) {
        for (int m = 0; m < kMelBins; ++m) {
            double acc = 0.0;
            for (int b = 0; b < kBins; ++b) {
                const double w = fb(m, b);
                if (w == 0.0) continue;
                acc += w * std::norm(spec.at(b, t));
            }
            out(m, t) = std::log(kLogFloorPower + acc);
        }
    }
    return out;
}

Mat32 normalize_log_mel(const Mat64& logmel, const MelNorm& norm) {
    Mat32 out(logmel.rows, logmel.cols);
    const double range = norm.cmax - norm.cmin;
    if (range <= 1e-12) {
        out.fill(-1.0f);
        return out;
    }
    for (size_t i = 0; i < logmel.data.size(); ++i) {
        const double v = 2.0 * (logmel.data[i] - norm.cmin) / range - 1.0;
        out.data[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
    }
    return out;
}

Mat64 denormalize_log_mel(const MelSpec& spec) {
    Mat64 out(spec.values.rows, spec.values.cols);
    const double range = spec.norm.cmax - spec.norm.cmin;
    for (size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = spec.norm.cmin + (static_cast<double>(spec.values.data[i]) + 1.0) * 0.5 * std::max(range, 0.0);
    }
    return out;
}

MelSpec melspec(const AudioClip& clip) {
    Mat64 lm = log_mel_spectrogram(clip);
    MelNorm norm;
    norm.cmin = lm.data[0];
    norm.cmax = lm.data[0];
    for (double v : lm.data) {
        norm.cmin = std::min(norm.cmin, v);
        norm.cmax = std::max(norm.cmax, v);
    }
    return {normalize_log_mel(lm, norm), norm};
}

std::vector<bool> active_frames(const MelSpec& spec, double activity_offset) {
    const Mat64 lm = denormalize_log_mel(spec);
    std::vector<bool> active(lm.cols);
    const double threshold = log_mel_floor() + activity_offset;
    for (int t = 0; t < lm.cols; ++t) {
        double mean = 0.0;
        for (int m = 0; m < lm.rows; ++m) mean += lm(m, t);
        mean /= lm.rows;
        active[t] = mean > threshold;
    }
    return active;
}

int frames_per_window(double clip_seconds) {
    return static_cast<int>(std::floor(clip_seconds * kSampleRate / kHop));
}

std::vector<MelSpec> segment(const MelSpec& track, double clip_seconds, double vocal_ratio_min,
                             double activity_offset, std::vector<WindowInfo>* info) {
    if (clip_seconds <= 0) throw data_error("segment: clip_seconds must be > 0");
    const int win = frames_per_window(clip_seconds);
    const auto active = active_frames(track, activity_offset);
    std::vector<MelSpec> kept;
    if (info) info->clear();
    for (int start = 0; start + win <= track.frames(); start += win) {
        int n_active = 0;
        for (int t = start; t < start + win; ++t) n_active += active[t] ? 1 : 0;
        const double frac = static_cast<double>(n_active) / win;
        const bool keep = !(frac < vocal_ratio_min);
        if (info) info->push_back({start, win, keep, frac});
        if (!keep) continue;
        MelSpec piece;
        piece.norm = track.norm;
        piece.values = Mat32(track.values.rows, win);
        for (int r = 0; r < track.values.rows; ++r) {
            for (int t = 0; t < win; ++t) piece.values(r, t) = track.values(r, start + t);
        }
        kept.push_back(std::move(piece));
    }
    return kept;
}

} // namespace svgen
