#include "svgen/eval/pitch.hpp"

#include <algorithm>
#include <cmath>

#include "svgen/audio/stft.hpp"

namespace svgen {

namespace {

constexpr int kYinWindow = 1024;
constexpr double kYinThreshold = 0.15;

double frame_rms(const std::vector<float>& x, int64_t start, int len) {
    double acc = 0.0;
    const int64_t n = static_cast<int64_t>(x.size());
    for (int i = 0; i < len; ++i) {
        const int64_t s = start + i;
        if (s >= 0 && s < n) acc += static_cast<double>(x[s]) * x[s];
    }
    return std::sqrt(acc / len);
}

} // namespace

PitchTrack track_pitch(const AudioClip& clip) {
    if (clip.sample_rate != kSampleRate) throw data_error("track_pitch: clip must be at 22050 Hz");
    const int tau_min = static_cast<int>(std::ceil(kSampleRate / kPitchMaxHz));  // 23
    const int tau_max = static_cast<int>(std::floor(kSampleRate / kPitchMinHz)); // 302
    const int frames = clip.samples.empty() ? 0 : stft_frame_count(static_cast<int64_t>(clip.samples.size()));
    const int64_t n = static_cast<int64_t>(clip.samples.size());

    PitchTrack track;
    track.pitch_hz.assign(frames, 0.0);
    track.confidence.assign(frames, 0.0);
    track.activation.assign(frames, 0.0);

    std::vector<double> x(kYinWindow + tau_max + 1);
    std::vector<double> diff(tau_max + 1), cmnd(tau_max + 1);

    for (int t = 0; t < frames; ++t) {
        const int64_t start = static_cast<int64_t>(t) * kHop;
        for (size_t i = 0; i < x.size(); ++i) {
            const int64_t s = start + static_cast<int64_t>(i);
            x[i] = (s >= 0 && s < n) ? clip.samples[s] : 0.0;
        }

        diff[0] = 0.0;
        for (int tau = 1; tau <= tau_max; ++tau) {
            double acc = 0.0;
            for (int j = 0; j < kYinWindow; ++j) {
                const double d = x[j] - x[j + tau];
                acc += d * d;
            }
            diff[tau] = acc;
        }
        // Cumulative mean normalization.
        cmnd[0] = 1.0;
        double running = 0.0;
        for (int tau = 1; tau <= tau_max; ++tau) {
            running += diff[tau];
            cmnd[tau] = running > 1e-20 ? diff[tau] * tau / running : 1.0;
        }

        // First dip below the threshold wins; otherwise the global minimum.
        int best = -1;
        for (int tau = tau_min; tau <= tau_max; ++tau) {
            if (cmnd[tau] < kYinThreshold) {
                while (tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
                best = tau;
                break;
            }
        }
        if (best < 0) {
            best = tau_min;
            for (int tau = tau_min; tau <= tau_max; ++tau) {
                if (cmnd[tau] < cmnd[best]) best = tau;
            }
        }

        // Parabolic interpolation of the dip.
        double tau_ref = best;
        if (best > tau_min && best < tau_max) {
            const double a = cmnd[best - 1], b = cmnd[best], c = cmnd[best + 1];
            const double denom = a - 2.0 * b + c;
            if (std::abs(denom) > 1e-20) tau_ref = best + 0.5 * (a - c) / denom;
        }

        const double conf = std::clamp(1.0 - cmnd[best], 0.0, 1.0);
        double pitch = kSampleRate / tau_ref;
        if (pitch < kPitchMinHz || pitch > kPitchMaxHz) pitch = 0.0;
        // Too unperiodic to call voiced at all.
        if (conf <= 0.0) pitch = 0.0;

        const double rms = frame_rms(clip.samples, start, kYinWindow);
        track.pitch_hz[t] = pitch;
        track.confidence[t] = conf;
        track.activation[t] = (rms >= kSilenceRms && pitch > 0.0) ? conf : 0.0;
    }
    return track;
}

std::vector<bool> nonsilent_frames(const AudioClip& clip) {
    const int frames = clip.samples.empty() ? 0 : stft_frame_count(static_cast<int64_t>(clip.samples.size()));
    std::vector<bool> mask(frames, false);
    for (int t = 0; t < frames; ++t) {
        mask[t] = frame_rms(clip.samples, static_cast<int64_t>(t) * kHop, kYinWindow) >= kSilenceRms;
    }
    return mask;
}

} // namespace svgen
