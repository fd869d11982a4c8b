#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "svgen/model/began.hpp"

using namespace svgen;

namespace {

G3BeganModel<float> small_model(CondMode mode, uint64_t seed = 7) {
    G3BeganConfig cfg;
    cfg.noise_dim = 4;
    cfg.width = 8;
    cfg.mel_bins = 80;
    cfg.mode = mode;
    Rng rng(seed);
    return G3BeganModel<float>(cfg, rng);
}

} // namespace

TEST_CASE("generate: output frame count tracks input for any T") {
    auto model = small_model(CondMode::kFree);
    Rng rng(1);
    for (int T : {50, 862}) {
        Mat32 z = sample_gaussian<float>(rng, 4, T);
        Mat32 y = model.generate(z);
        CHECK(y.rows == 80);
        CHECK(y.cols == T);
    }
}

TEST_CASE("generate: output values stay in [-1, 1]") {
    auto model = small_model(CondMode::kFree);
    Rng rng(2);
    Mat32 y = model.generate(sample_gaussian<float>(rng, 4, 33));
    for (float v : y.data) {
        CHECK(v <= 1.0f);
        CHECK(v >= -1.0f);
    }
}

TEST_CASE("generate: fixed seed reproduces the output bitwise") {
    auto model = small_model(CondMode::kFree);
    auto run = [&] {
        Rng rng(99);
        return model.generate(sample_gaussian<float>(rng, 4, 21));
    };
    CHECK(exact_equal(run(), run()));
}

TEST_CASE("condition validation per mode") {
    Rng rng(3);
    auto free_model = small_model(CondMode::kFree);
    Mat32 z = sample_gaussian<float>(rng, 4, 10);
    Mat32 cond88 = Mat32(88, 10);
    CHECK_THROWS_AS(free_model.generate(z, &cond88), data_error);

    auto roll_model = small_model(CondMode::kPianoRoll);
    CHECK_THROWS_AS(roll_model.generate(z), data_error); // missing condition
    Mat32 bad_rows(44, 10);
    CHECK_THROWS_AS(roll_model.generate(z, &bad_rows), data_error);
    Mat32 bad_frames(88, 9);
    CHECK_THROWS_AS(roll_model.generate(z, &bad_frames), data_error);
    CHECK(roll_model.generate(z, &cond88).cols == 10);

    auto chord_model = small_model(CondMode::kChord);
    Mat32 cond24(24, 10);
    CHECK(chord_model.generate(z, &cond24).cols == 10);
}

TEST_CASE("disc_recon_loss: identity reconstruction scores zero") {
    // The loss function itself, with the autoencoder stubbed to identity.
    Graph<float> g;
    Rng rng(4);
    auto m = g.input(sample_gaussian<float>(rng, 5, 7));
    CHECK(g.scalar_val(g.l1_diff_mean(m, m)) == 0.0f);
}

TEST_CASE("disc_recon_loss: constant 0.5 output against zero target scores 0.5") {
    Graph<float> g;
    auto recon = g.input(Mat32::filled(2, 2, 0.5f));
    auto target = g.input(Mat32(2, 2));
    CHECK(g.scalar_val(g.l1_diff_mean(recon, target)) == doctest::Approx(0.5));
}

TEST_CASE("disc_recon_loss: invariant to permuting cells jointly") {
    Graph<float> g;
    auto a1 = g.input(Mat32(2, 2, {0.1f, -0.4f, 0.7f, 0.2f}));
    auto b1 = g.input(Mat32(2, 2, {0.3f, 0.1f, -0.2f, 0.6f}));
    auto a2 = g.input(Mat32(2, 2, {0.2f, 0.7f, -0.4f, 0.1f})); // same multiset of pairs
    auto b2 = g.input(Mat32(2, 2, {0.6f, -0.2f, 0.1f, 0.3f}));
    CHECK(g.scalar_val(g.l1_diff_mean(a1, b1)) == doctest::Approx(g.scalar_val(g.l1_diff_mean(a2, b2))));
}

TEST_CASE("disc_recon_loss via the model rejects wrong rows") {
    auto model = small_model(CondMode::kFree);
    Mat32 bad(44, 5);
    CHECK_THROWS_AS(model.disc_recon_loss(bad), data_error);
}

TEST_CASE("began_losses hand values") {
    BeganState s;
    s.tau = 0.0;
    auto [ld0, lg0] = began_losses(s, 1.7, 0.4);
    CHECK(ld0 == doctest::Approx(1.7)); // tau = 0 -> l_D = lx
    CHECK(lg0 == doctest::Approx(0.4));

    s.tau = 0.5;
    auto [ld, lg] = began_losses(s, 1.0, 0.2);
    CHECK(ld == doctest::Approx(0.9));
    CHECK(lg == doctest::Approx(0.2));
}

TEST_CASE("began_losses: l_G equals lg regardless of tau") {
    for (double tau : {0.0, 0.25, 1.0}) {
        BeganState s;
        s.tau = tau;
        CHECK(began_losses(s, 2.0, 0.7).second == doctest::Approx(0.7));
    }
}

TEST_CASE("tau_update hand values and clamping") {
    BeganState s;
    s.tau = 0.0;
    s.lambda = 0.001;
    s.gamma = 0.5;
    CHECK(tau_update(s, 1.0, 0.2).tau == doctest::Approx(0.0003));

    // equilibrium: lg = gamma * lx leaves tau unchanged
    s.tau = 0.37;
    CHECK(tau_update(s, 1.0, 0.5).tau == doctest::Approx(0.37));

    s.tau = 1.0;
    s.lambda = 10.0;
    CHECK(tau_update(s, 5.0, 0.0).tau == 1.0); // clamped at the top

    s.tau = 0.0;
    CHECK(tau_update(s, 0.0, 5.0).tau == 0.0); // clamped at the bottom
}

TEST_CASE("convergence_metric hand values") {
    CHECK(convergence_metric(0.0, 0.0, 0.5) == 0.0);
    CHECK(convergence_metric(1.0, 0.5, 0.5) == doctest::Approx(1.0));
    // metric >= lx always
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const double lx = std::abs(rng.normal());
        const double lg = std::abs(rng.normal());
        CHECK(convergence_metric(lx, lg, 0.5) >= lx);
    }
}
