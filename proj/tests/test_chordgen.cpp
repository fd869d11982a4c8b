#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "svgen/chord/chord_model.hpp"
#include "svgen/train/checkpoint.hpp"

using namespace svgen;

namespace {

ChordModelConfig tiny_config(bool melody = false) {
    ChordModelConfig cfg;
    cfg.embed_dim = 24;
    cfg.hidden_dim = 24;
    cfg.melody_input = melody;
    return cfg;
}

LeadSheet make_sheet(std::vector<int> chords, int key_root = 0) {
    LeadSheet s;
    s.key_root = key_root;
    s.tempo_bpm = 120.0;
    s.ts_index = time_signature_index(4, 4);
    s.melody.assign(chords.size(), 60);
    s.chords = std::move(chords);
    return s;
}

} // namespace

TEST_CASE("step input dims: 524 for the generator, 536 with melody chroma") {
    CHECK(ChordModelConfig{}.step_input_dim() == 524); // 512 embedding + 12 beat positions
    ChordModelConfig mh;
    mh.melody_input = true;
    CHECK(mh.step_input_dim() == 536);
}

TEST_CASE("vocabulary: 612 tokens, encode/decode round-trips everywhere") {
    const auto& v = ChordVocab::instance();
    CHECK(v.size() == 612);
    for (int tok = 0; tok < v.size(); ++tok) {
        const auto d = v.decode(tok);
        CHECK(v.encode(d.root, d.quality) == tok);
        CHECK((d.chroma & (1u << d.root)) != 0); // root is always sounding
    }
    CHECK_THROWS_AS(v.decode(612), data_error);
    CHECK_THROWS_AS(v.decode(-1), data_error);
}

TEST_CASE("vocabulary: shipped table matches the compiled-in table") {
    const auto& builtin = ChordVocab::instance();
    const auto from_file = ChordVocab::from_file(std::string(SVGEN_SOURCE_DIR) + "/data/chord_qualities.txt");
    for (int q = 0; q < kNumQualities; ++q) {
        CHECK(builtin.quality_name(q) == from_file.quality_name(q));
        CHECK(builtin.quality_intervals(q) == from_file.quality_intervals(q));
    }
}

TEST_CASE("vocabulary: C major chroma is {C,E,G}") {
    const auto& v = ChordVocab::instance();
    const auto d = v.decode(v.encode(0, 0));
    CHECK(d.chroma == ((1u << 0) | (1u << 4) | (1u << 7)));
    // transposed to D: {D, F#, A}
    const auto d2 = v.decode(v.transpose(v.encode(0, 0), 2));
    CHECK(d2.chroma == ((1u << 2) | (1u << 6) | (1u << 9)));
}

TEST_CASE("generation condition is a 40-dim triple one-hot") {
    Mat32 c = gen_condition(7, true, 128.0, time_signature_index(3, 4));
    CHECK(c.rows == 40);
    int key_bits = 0, tempo_bits = 0, ts_bits = 0;
    for (int i = 0; i < 24; ++i) key_bits += c(i, 0) != 0.0f;
    for (int i = 24; i < 34; ++i) tempo_bits += c(i, 0) != 0.0f;
    for (int i = 34; i < 40; ++i) ts_bits += c(i, 0) != 0.0f;
    CHECK(key_bits == 1);
    CHECK(tempo_bits == 1);
    CHECK(ts_bits == 1);
    CHECK(c(7 + 12, 0) == 1.0f); // minor block
}

TEST_CASE("tempo buckets cover 60-240 in 10 options") {
    CHECK(tempo_options().size() == 10);
    CHECK(tempo_bucket(60) == 0);
    CHECK(tempo_bucket(240) == 9);
    CHECK(tempo_bucket(128) == 3); // nearest 120
}

TEST_CASE("step: fresh model is exactly uniform (zero output projection)") {
    ChordModel model(tiny_config(), 42);
    auto state = model.initial_state(gen_condition(0, false, 120.0, 2));
    auto probs = model.step_probs(-1, 0, state);
    double sum = 0.0;
    for (double p : probs) {
        CHECK(p == doctest::Approx(1.0 / 612).epsilon(1e-9));
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("step: probabilities sum to one after training") {
    ChordModel model(tiny_config(), 42);
    auto sheets = std::vector<LeadSheet>{make_sheet({0, 51, 102, 153})};
    ChordTrainConfig tc;
    tc.steps = 20;
    train_chord_model(model, sheets, tc);
    auto state = model.initial_state(gen_condition(0, false, 120.0, 2));
    auto probs = model.step_probs(3, 6, state);
    double sum = 0.0;
    for (double p : probs) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("step: invalid token or beat position is rejected") {
    ChordModel model(tiny_config(), 1);
    auto state = model.initial_state(gen_condition(0, false, 120.0, 2));
    CHECK_THROWS_AS(model.step_probs(612, 0, state), data_error);
    CHECK_THROWS_AS(model.step_probs(-2, 0, state), data_error);
    CHECK_THROWS_AS(model.step_probs(0, 12, state), data_error);
}

TEST_CASE("sampling: deterministic per seed, correct length, greedy at low temperature") {
    ChordModel model(tiny_config(), 7);
    // Break the fresh model's all-tied logits so argmax is well defined.
    std::vector<LeadSheet> sheets{make_sheet({3, 14, 159, 26})};
    ChordTrainConfig tc;
    tc.steps = 30;
    train_chord_model(model, sheets, tc);

    const int bars = 3;
    const int ts = time_signature_index(3, 4);
    auto a = model.sample_progression(0, false, 120.0, ts, bars, 1.0, 77);
    auto b = model.sample_progression(0, false, 120.0, ts, bars, 1.0, 77);
    CHECK(a == b);
    CHECK(static_cast<int>(a.size()) == bars * 3);

    // temperature -> 0 equals the argmax path, independent of the seed
    auto greedy = model.sample_progression(0, false, 120.0, ts, bars, 1e-7, 1);
    auto greedy2 = model.sample_progression(0, false, 120.0, ts, bars, 1e-7, 999);
    CHECK(greedy == greedy2);

    // and matches an explicit argmax rollout
    auto state = model.initial_state(gen_condition(0, false, 120.0, ts));
    std::vector<int> manual;
    int prev = -1;
    for (int t = 0; t < bars * 3; ++t) {
        auto probs = model.step_probs(prev, beat_position(t, ts), state);
        int arg = 0;
        for (size_t i = 1; i < probs.size(); ++i) {
            if (probs[i] > probs[arg]) arg = static_cast<int>(i);
        }
        manual.push_back(arg);
        prev = arg;
    }
    CHECK(greedy == manual);
}

TEST_CASE("augment_rotate_keys multiplies the corpus by exactly 12") {
    std::vector<LeadSheet> sheets;
    for (int i = 0; i < 5; ++i) sheets.push_back(make_sheet({10, 20, 30, 40}, i));
    auto out = augment_rotate_keys(sheets);
    CHECK(out.size() == 60);
    for (const auto& s : out) CHECK(s.chords.size() == 4);

    // rotation 0 is the identity
    CHECK(out[0].chords == sheets[0].chords);
    CHECK(out[0].key_root == sheets[0].key_root);

    // chroma of a transposed chord is the rotated chroma of the original
    const auto& v = ChordVocab::instance();
    const auto base = v.decode(sheets[0].chords[0]);
    const auto rot = v.decode(out[5].chords[0]); // +5 semitones
    for (int pc = 0; pc < 12; ++pc) {
        const bool orig = (base.chroma >> pc) & 1;
        const bool moved = (rot.chroma >> ((pc + 5) % 12)) & 1;
        CHECK(orig == moved);
    }
}

TEST_CASE("teacher-forced NLL starts at ln(612) and drops below it quickly") {
    ChordModel model(tiny_config(), 3);
    std::vector<LeadSheet> sheets{make_sheet({5, 56, 107, 158, 209, 260, 311, 362})};
    Graph<float> g0;
    CHECK(g0.scalar_val(model.nll_loss(g0, sheets[0])) == doctest::Approx(std::log(612.0)).epsilon(1e-5));

    ChordTrainConfig tc;
    tc.steps = 60;
    auto trace = train_chord_model(model, sheets, tc);
    CHECK(trace.back() < std::log(612.0));
}

TEST_CASE("overfit: greedy sampling reproduces a memorized progression") {
    ChordModel model(tiny_config(), 5);
    const std::vector<int> prog{0, 460, 255, 357, 0, 460, 255, 357}; // C Am F G, twice
    std::vector<LeadSheet> sheets{make_sheet(prog)};
    ChordTrainConfig tc;
    tc.steps = 800;
    tc.lr = 3e-3;
    train_chord_model(model, sheets, tc);
    auto sampled = model.sample_progression(0, false, 120.0, 2, 2, 1e-7, 1);
    CHECK(sampled == prog);
}

TEST_CASE("matchness: uniform model scores exactly log(1/612) per step") {
    ChordModel model(tiny_config(true), 9);
    Mat32 chroma(12, 4);
    std::vector<int> chords{1, 2, 3, 4};
    CHECK(model.matchness(chroma, chords) == doctest::Approx(-std::log(612.0)).epsilon(1e-5));
}

TEST_CASE("matchness: always <= 0, and length mismatches are rejected") {
    ChordModel model(tiny_config(true), 10);
    Mat32 chroma(12, 3);
    CHECK(model.matchness(chroma, {4, 5, 6}) <= 0.0);
    CHECK_THROWS_AS(model.matchness(chroma, {4, 5}), data_error);
    ChordModel plain(tiny_config(false), 10);
    CHECK_THROWS_AS(plain.matchness(chroma, {4, 5, 6}), data_error);
}

TEST_CASE("matchness: training on aligned pairs raises the true-pair score") {
    ChordModel model(tiny_config(true), 11);
    // Melody arpeggiates the chord; chords alternate C maj / G maj.
    const auto& v = ChordVocab::instance();
    const int cmaj = v.encode(0, 0), gmaj = v.encode(7, 0);
    LeadSheet s = make_sheet({cmaj, gmaj, cmaj, gmaj, cmaj, gmaj, cmaj, gmaj});
    for (size_t i = 0; i < s.melody.size(); ++i) s.melody[i] = (s.chords[i] == cmaj) ? 60 : 67;

    const Mat32 chroma = melody_chroma(s.melody);
    const double before = model.matchness(chroma, s.chords);
    ChordTrainConfig tc;
    tc.steps = 120;
    train_chord_model(model, {s}, tc);
    const double after = model.matchness(chroma, s.chords);
    CHECK(after > before);
}

TEST_CASE("chord checkpoint round trip preserves parameters and kind") {
    ChordModel model(tiny_config(true), 12);
    const std::string p = "/tmp/svgen_test_chord.ckpt";
    save_chord_checkpoint(p, model, 123);
    auto loaded = load_chord_checkpoint(p);
    CHECK(loaded.step == 123);
    CHECK(loaded.model->config().melody_input);
    CHECK(loaded.model->config().embed_dim == 24);
    for (size_t i = 0; i < model.params().size(); ++i) {
        CHECK(exact_equal(model.params().at(i).value, loaded.model->params().at(i).value));
    }
    CHECK(is_chord_checkpoint(p));
    std::remove(p.c_str());
}

TEST_CASE("lead sheets: JSON round trip") {
    std::vector<LeadSheet> sheets{make_sheet({9, 18, 27, 36}, 4)};
    sheets[0].minor = true;
    const std::string p = "/tmp/svgen_test_sheets.json";
    save_lead_sheets(p, sheets);
    auto loaded = load_lead_sheets(p);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].chords == sheets[0].chords);
    CHECK(loaded[0].melody == sheets[0].melody);
    CHECK(loaded[0].minor);
    CHECK(loaded[0].key_root == 4);
    std::remove(p.c_str());
}
