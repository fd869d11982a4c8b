#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "svgen/audio/condition.hpp"
#include "svgen/audio/feature_io.hpp"
#include "svgen/audio/griffinlim.hpp"
#include "svgen/audio/mel.hpp"
#include "svgen/audio/resample.hpp"
#include "svgen/audio/wav.hpp"
#include "svgen/chord/vocab.hpp"
#include "svgen/eval/pitch.hpp"

using namespace svgen;

namespace {

AudioClip sine(double freq, double seconds, double amp = 0.8, int sr = kSampleRate) {
    AudioClip c;
    c.sample_rate = sr;
    const int n = static_cast<int>(seconds * sr);
    c.samples.resize(n);
    for (int i = 0; i < n; ++i) {
        c.samples[i] = static_cast<float>(amp * std::sin(2.0 * 3.14159265358979323846 * freq * i / sr));
    }
    return c;
}

double median_voiced_pitch(const PitchTrack& t) {
    std::vector<double> v;
    for (size_t i = 0; i < t.frames(); ++i) {
        if (t.pitch_hz[i] > 0 && t.confidence[i] > 0.5) v.push_back(t.pitch_hz[i]);
    }
    REQUIRE(!v.empty());
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

} // namespace

TEST_CASE("wav: write/read round trip preserves samples to 16-bit accuracy") {
    AudioClip c = sine(440.0, 0.25);
    const std::string p = "/tmp/svgen_test_rt.wav";
    write_wav(p, c);
    AudioClip r = read_wav(p);
    REQUIRE(r.samples.size() == c.samples.size());
    CHECK(r.sample_rate == kSampleRate);
    for (size_t i = 0; i < c.samples.size(); i += 97) {
        CHECK(std::abs(r.samples[i] - c.samples[i]) < 2.0 / 32768.0);
    }
    std::remove(p.c_str());
}

TEST_CASE("wav: garbage file is rejected") {
    const std::string p = "/tmp/svgen_test_bad.wav";
    std::ofstream f(p, std::ios::binary);
    f << "this is not audio";
    f.close();
    CHECK_THROWS_AS(read_wav(p), data_error);
    std::remove(p.c_str());
}

TEST_CASE("resample: 44100 -> 22050 halves the length and keeps the pitch") {
    AudioClip c = sine(440.0, 0.5, 0.8, 44100);
    AudioClip r = resample(c, kSampleRate);
    CHECK(r.sample_rate == kSampleRate);
    CHECK(std::abs(static_cast<long>(r.samples.size()) - static_cast<long>(c.samples.size() / 2)) <= 1);
    const double pitch = median_voiced_pitch(track_pitch(r));
    CHECK(pitch == doctest::Approx(440.0).epsilon(0.01));
}

TEST_CASE("melspec: frame counts are ceil(samples/hop)") {
    // 10 s at 22050 Hz -> 431 frames, 20 s -> 862.
    CHECK(stft_frame_count(220500) == 431);
    CHECK(stft_frame_count(441000) == 862);
    AudioClip c = sine(440.0, 10.0);
    MelSpec m = melspec(c);
    CHECK(m.values.rows == 80);
    CHECK(m.frames() == 431);
}

TEST_CASE("melspec: pure tone peaks at the band whose center is nearest") {
    // Band-center oracle, computed from the documented filterbank geometry.
    const auto centers = mel_band_centers();
    for (double freq : {1000.0, 440.0}) {
        int nearest = 0;
        for (size_t i = 1; i < centers.size(); ++i) {
            if (std::abs(centers[i] - freq) < std::abs(centers[nearest] - freq)) nearest = static_cast<int>(i);
        }
        AudioClip c = sine(freq, 1.0);
        Mat64 lm = log_mel_spectrogram(c);
        const int t = lm.cols / 2;
        int argmax = 0;
        for (int m = 1; m < lm.rows; ++m) {
            if (lm(m, t) > lm(argmax, t)) argmax = m;
        }
        INFO("freq=", freq, " argmax=", argmax, " nearest=", nearest);
        CHECK(argmax == nearest);
    }
}

TEST_CASE("melspec: silence sits at the normalized floor") {
    AudioClip c;
    c.samples.assign(22050, 0.0f);
    MelSpec m = melspec(c);
    for (float v : m.values.data) CHECK(v == -1.0f);
}

TEST_CASE("melspec: empty audio is an error") {
    AudioClip c;
    CHECK_THROWS_AS(melspec(c), data_error);
}

TEST_CASE("segment: fully active 30 s track at 10 s windows gives 3 clips") {
    MelSpec track;
    track.norm = {log_mel_floor(), log_mel_floor() + 10.0};
    track.values = Mat32::filled(80, stft_frame_count(30 * 22050), 0.5f); // loud everywhere
    std::vector<WindowInfo> info;
    auto clips = segment(track, 10.0, 0.40, kDefaultActivityOffset, &info);
    CHECK(clips.size() == 3);
    CHECK(info.size() == 3);
    // Windows are disjoint, ordered, and cover the head of the track.
    int expect_start = 0;
    for (const auto& w : info) {
        CHECK(w.start == expect_start);
        expect_start += w.frames;
    }
    CHECK(expect_start <= track.frames());
    CHECK(track.frames() - expect_start < frames_per_window(10.0)); // only the tail is left over
}

TEST_CASE("segment: all-silent track keeps nothing") {
    MelSpec track;
    track.norm = {log_mel_floor(), log_mel_floor() + 10.0};
    track.values = Mat32::filled(80, 1292, -1.0f);
    CHECK(segment(track, 10.0, 0.40).empty());
}

TEST_CASE("segment: strict threshold semantics at the 40% boundary") {
    MelSpec track;
    track.norm = {log_mel_floor(), log_mel_floor() + 10.0};
    const int win = frames_per_window(10.0); // 430
    track.values = Mat32(80, win * 2);
    track.values.fill(-1.0f);
    auto activate = [&](int t) {
        for (int m = 0; m < 80; ++m) track.values(m, t) = 0.5f;
    };
    // Window 0: 39% active -> dropped. Window 1: exactly 40% -> kept.
    const int w39 = static_cast<int>(std::floor(0.39 * win));
    for (int t = 0; t < w39; ++t) activate(t);
    const int w40 = win * 40 / 100; // 172 = exactly 0.4 * 430
    for (int t = win; t < win + w40; ++t) activate(t);

    std::vector<WindowInfo> info;
    auto clips = segment(track, 10.0, 0.40, kDefaultActivityOffset, &info);
    REQUIRE(info.size() == 2);
    CHECK(info[0].active_fraction < 0.40);
    CHECK_FALSE(info[0].kept);
    CHECK(info[1].active_fraction == doctest::Approx(0.40));
    CHECK(info[1].kept);
    CHECK(clips.size() == 1);
}

TEST_CASE("feature file: write/read round trip is bit-exact") {
    Rng rng(1);
    Mat32 m = sample_gaussian<float>(rng, 80, 137);
    const std::string p = "/tmp/svgen_test_feat.ftns";
    write_feature(p, m);
    Mat32 r = read_feature_f32(p);
    CHECK(exact_equal(m, r));
    std::remove(p.c_str());
}

TEST_CASE("feature file: corruption fails the checksum") {
    Mat32 m(4, 4);
    const std::string p = "/tmp/svgen_test_feat_bad.ftns";
    write_feature(p, m);
    {
        std::fstream f(p, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(25);
        char junk = 0x5A;
        f.write(&junk, 1);
    }
    CHECK_THROWS_AS(read_feature_f32(p), data_error);
    std::remove(p.c_str());
}

TEST_CASE("build_condition: free mode is absent, conditions are validated") {
    CHECK(!build_condition(CondMode::kFree, nullptr, nullptr, 120.0, 100).has_value());
    Mat32 roll(88, 100);
    CHECK_THROWS_AS(build_condition(CondMode::kFree, &roll, nullptr, 120.0, 100), data_error);
    CHECK_THROWS_AS(build_condition(CondMode::kPianoRoll, nullptr, nullptr, 120.0, 100), data_error);
}

TEST_CASE("build_condition: sustained A4 piano roll sets exactly the MIDI 69 row") {
    Mat32 roll(88, 50);
    for (int t = 0; t < 50; ++t) roll(69 - 21, t) = 1.0f;
    auto cond = build_condition(CondMode::kPianoRoll, &roll, nullptr, 120.0, 50);
    REQUIRE(cond.has_value());
    for (int r = 0; r < 88; ++r) {
        for (int t = 0; t < 50; ++t) CHECK((*cond)(r, t) == (r == 48 ? 1.0f : 0.0f));
    }
}

TEST_CASE("build_condition: piano roll frame mismatch is an error") {
    Mat32 roll(88, 49);
    CHECK_THROWS_AS(build_condition(CondMode::kPianoRoll, &roll, nullptr, 120.0, 50), data_error);
}

TEST_CASE("build_condition: C major chord sets chroma rows C, E, G and the root row") {
    const auto& vocab = ChordVocab::instance();
    std::vector<int> chords{vocab.encode(0, 0)}; // C maj
    auto cond = build_condition(CondMode::kChord, nullptr, &chords, 120.0, 12);
    REQUIRE(cond.has_value());
    CHECK(cond->rows == 24);
    for (int t = 0; t < cond->cols; ++t) {
        for (int pc = 0; pc < 12; ++pc) {
            const bool expect = pc == 0 || pc == 4 || pc == 7;
            CHECK((*cond)(pc, t) == (expect ? 1.0f : 0.0f));
        }
        CHECK((*cond)(12, t) == 1.0f); // root C one-hot
    }
}

TEST_CASE("griffin-lim: silence inverts to near-silence") {
    MelSpec m;
    m.norm = {log_mel_floor(), log_mel_floor() + 10.0};
    m.values = Mat32::filled(80, 43, -1.0f);
    AudioClip a = griffin_lim(m, 5);
    double rms = 0.0;
    for (float v : a.samples) rms += static_cast<double>(v) * v;
    rms = std::sqrt(rms / a.samples.size());
    CHECK(rms < 1e-3);
}

TEST_CASE("griffin-lim: output duration is frames*hop within one hop") {
    MelSpec m;
    m.norm = {log_mel_floor(), log_mel_floor() + 10.0};
    m.values = Mat32::filled(80, 43, -1.0f);
    AudioClip a = griffin_lim(m, 2);
    CHECK(std::abs(static_cast<long>(a.samples.size()) - 43L * kHop) <= kHop);
}

TEST_CASE("griffin-lim: 440 Hz tone round trip re-detects 440 +- 5 Hz") {
    AudioClip tone = sine(440.0, 1.0);
    MelSpec m = melspec(tone);
    AudioClip rec = griffin_lim(m, 40);
    const double pitch = median_voiced_pitch(track_pitch(rec));
    INFO("detected ", pitch);
    CHECK(std::abs(pitch - 440.0) <= 5.0);
}
