#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "helpers.hpp"
#include "svgen/train/checkpoint.hpp"

using namespace svgen;
using svgen::testing::toy_corpus;

namespace {

TrainConfig small_config(CondMode mode = CondMode::kFree) {
    TrainConfig cfg;
    cfg.seed = 11;
    cfg.width = 16;
    cfg.noise_dim = 6;
    cfg.batch_size = 5;
    cfg.val_fraction = 0.0;
    cfg.mode = mode;
    return cfg;
}

std::vector<StepStats> run_steps(BeganTrainer& t, int n) {
    std::vector<StepStats> out;
    for (int i = 0; i < n; ++i) out.push_back(t.step());
    return out;
}

bool same_trace(const std::vector<StepStats>& a, const std::vector<StepStats>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].lx != b[i].lx || a[i].lg != b[i].lg || a[i].l_d != b[i].l_d || a[i].l_g != b[i].l_g ||
            a[i].tau != b[i].tau) {
            return false;
        }
    }
    return true;
}

std::string temp_path(const char* name) {
    return std::string("/tmp/svgen_test_") + name;
}

} // namespace

TEST_CASE("select_best_epoch picks the earliest minimum") {
    CHECK(select_best_epoch({3.0, 1.0, 2.0}) == 1);
    CHECK(select_best_epoch({1.0, 1.0}) == 0);
    CHECK(select_best_epoch({0.5}) == 0);
    CHECK_THROWS_AS(select_best_epoch({}), data_error);
}

TEST_CASE("lr=0 leaves parameters unchanged but tau still updates") {
    auto cfg = small_config();
    cfg.lr = 0.0;
    cfg.tau0 = 0.5; // mid-range start so the unclamped update is visible
    BeganTrainer t(cfg, toy_corpus(5, 12, 21));
    std::vector<float> before;
    for (size_t i = 0; i < t.model().g_params.size(); ++i) {
        for (float v : t.model().g_params.at(i).value.data) before.push_back(v);
    }
    auto s = t.step();
    CHECK(s.tau != 0.5); // moved away from tau0
    size_t k = 0;
    bool unchanged = true;
    for (size_t i = 0; i < t.model().g_params.size(); ++i) {
        for (float v : t.model().g_params.at(i).value.data) unchanged = unchanged && (v == before[k++]);
    }
    CHECK(unchanged);
}

TEST_CASE("same seed and data reproduce the loss trace exactly") {
    auto cfg = small_config();
    BeganTrainer a(cfg, toy_corpus(6, 10, 33));
    BeganTrainer b(cfg, toy_corpus(6, 10, 33));
    CHECK(same_trace(run_steps(a, 6), run_steps(b, 6)));
}

TEST_CASE("tau stays in [0,1] and batches bucket by frame count") {
    auto cfg = small_config();
    cfg.batch_size = 3;
    // Mixed lengths: every batch must hold equal-length clips.
    auto clips = toy_corpus(4, 10, 44);
    auto more = toy_corpus(5, 14, 45);
    for (auto& c : more) clips.push_back(std::move(c));
    BeganTrainer t(cfg, std::move(clips));
    for (int i = 0; i < 8; ++i) {
        auto s = t.step();
        CHECK(s.tau >= 0.0);
        CHECK(s.tau <= 1.0);
        CHECK(std::isfinite(s.lx));
    }
}

TEST_CASE("conditioned training step runs and stays finite") {
    for (CondMode mode : {CondMode::kPianoRoll, CondMode::kChord}) {
        auto cfg = small_config(mode);
        BeganTrainer t(cfg, toy_corpus(5, 8, 55, mode));
        auto s = t.step();
        CHECK(std::isfinite(s.l_d));
        CHECK(std::isfinite(s.l_g));
    }
}

TEST_CASE("checkpoint: save -> load -> save is byte-identical") {
    auto cfg = small_config();
    BeganTrainer t(cfg, toy_corpus(5, 10, 66));
    run_steps(t, 3);
    t.state().epoch_metric_history = {1.5, 0.75};

    const std::string p1 = temp_path("ck1"), p2 = temp_path("ck2");
    MelNorm norm{-11.512925464970229, 4.2};
    save_checkpoint(p1, t.model(), t.state(), t.rng().state(), norm);
    LoadedBegan loaded = load_checkpoint(p1);
    save_checkpoint(p2, *loaded.model, loaded.state, loaded.rng, loaded.norm);

    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::vector<char> b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::vector<char> b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    CHECK(loaded.state.step == 3);
    CHECK(loaded.norm.cmax == doctest::Approx(4.2));
    CHECK(loaded.state.epoch_metric_history.size() == 2);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("checkpoint: truncation fails the checksum, nothing is loaded") {
    auto cfg = small_config();
    BeganTrainer t(cfg, toy_corpus(5, 10, 77));
    const std::string p = temp_path("ck_trunc");
    save_checkpoint(p, t.model(), t.state(), t.rng().state(), MelNorm{});

    std::ifstream in(p, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    bytes.resize(bytes.size() - 37);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();

    try {
        load_checkpoint(p);
        FAIL("expected data_error");
    } catch (const data_error& e) {
        CHECK(std::string(e.what()).find("checksum") != std::string::npos);
    }
    std::remove(p.c_str());
}

TEST_CASE("resumed training reproduces the uninterrupted loss trace") {
    auto cfg = small_config();
    cfg.val_fraction = 0.2;

    BeganTrainer full(cfg, toy_corpus(10, 8, 88));
    std::vector<StepStats> full_trace;
    full.run(4, [&](const StepStats& s) { full_trace.push_back(s); });

    BeganTrainer part(cfg, toy_corpus(10, 8, 88));
    std::vector<StepStats> tail_trace;
    part.run(2, [&](const StepStats&) {});
    const std::string p = temp_path("ck_resume");
    save_checkpoint(p, part.model(), part.state(), part.rng().state(), MelNorm{});

    BeganTrainer resumed(cfg, toy_corpus(10, 8, 88));
    LoadedBegan loaded = load_checkpoint(p);
    // Restore parameters, optimizer moments, trainer state and rng stream.
    for (size_t i = 0; i < resumed.model().g_params.size(); ++i) {
        resumed.model().g_params.at(i).value = loaded.model->g_params.at(i).value;
        resumed.model().g_params.at(i).m1 = loaded.model->g_params.at(i).m1;
        resumed.model().g_params.at(i).m2 = loaded.model->g_params.at(i).m2;
    }
    for (size_t i = 0; i < resumed.model().d_params.size(); ++i) {
        resumed.model().d_params.at(i).value = loaded.model->d_params.at(i).value;
        resumed.model().d_params.at(i).m1 = loaded.model->d_params.at(i).m1;
        resumed.model().d_params.at(i).m2 = loaded.model->d_params.at(i).m2;
    }
    resumed.restore(loaded.state, loaded.rng);
    resumed.run(2, [&](const StepStats& s) { tail_trace.push_back(s); });

    REQUIRE(full_trace.size() == 2 * tail_trace.size());
    std::vector<StepStats> full_tail(full_trace.begin() + tail_trace.size(), full_trace.end());
    CHECK(same_trace(full_tail, tail_trace));
    CHECK(full.state().epoch_metric_history == resumed.state().epoch_metric_history);
    std::remove(p.c_str());
}

TEST_CASE("generator loss trends down while overfitting a tiny corpus") {
    auto cfg = small_config();
    cfg.width = 16;
    BeganTrainer t(cfg, toy_corpus(5, 16, 99));
    auto trace = run_steps(t, 150);
    // window-50 moving average; adversarial noise allowed, the trend is not
    auto ma = [&](int from) {
        double s = 0.0;
        for (int i = from; i < from + 50; ++i) s += trace[i].l_g;
        return s / 50;
    };
    CHECK(ma(100) < ma(0));
}
