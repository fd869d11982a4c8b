#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "../tools/commands.hpp"
#include "svgen/audio/feature_io.hpp"
#include "svgen/audio/wav.hpp"
#include "svgen/chord/chord_model.hpp"
#include "svgen/train/checkpoint.hpp"

using namespace svgen;
using namespace svgen::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = fs::path(SVGEN_SOURCE_DIR);

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::path("/tmp") / ("svgen_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_tone_wav(const fs::path& p, double seconds, double freq = 220.0) {
    AudioClip c;
    c.sample_rate = kSampleRate;
    const size_t n = static_cast<size_t>(seconds * kSampleRate);
    c.samples.resize(n);
    // Harmonic-rich signal so frames clear the energy-activity gate.
    for (size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (int h = 1; h <= 12; ++h) {
            v += std::sin(2.0 * 3.14159265358979323846 * freq * h * i / kSampleRate) / h;
        }
        c.samples[i] = static_cast<float>(0.45 * v);
    }
    write_wav(p.string(), c);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string make_free_checkpoint(const fs::path& dir) {
    TrainConfig cfg;
    cfg.width = 16;
    cfg.noise_dim = 6;
    cfg.val_fraction = 0.0;
    Rng rng(3);
    std::vector<ClipData> clips;
    for (int i = 0; i < 5; ++i) clips.push_back({sample_gaussian<float>(rng, 80, 16), std::nullopt});
    for (auto& c : clips) {
        for (auto& v : c.mel.data) v = std::tanh(v);
    }
    BeganTrainer t(cfg, std::move(clips));
    t.step();
    const std::string p = (dir / "free.ckpt").string();
    save_checkpoint(p, t.model(), t.state(), t.rng().state(), MelNorm{-11.512925464970229, 1.0});
    return p;
}

} // namespace

TEST_CASE("prepare: empty input directory yields an empty manifest") {
    const fs::path in = fresh_dir("prep_empty_in"), out = fresh_dir("prep_empty_out");
    PrepareOptions opt;
    opt.in_dir = in.string();
    opt.out_dir = out.string();
    CHECK(cmd_prepare(opt) == kExitOk);
    auto j = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(j["clips"].empty());
    CHECK(j["errors"].empty());
}

TEST_CASE("prepare: a fully voiced 30 s WAV becomes 3 clips; corrupt files are reported") {
    const fs::path in = fresh_dir("prep_in"), out = fresh_dir("prep_out");
    write_tone_wav(in / "song.wav", 30.0);
    std::ofstream bad(in / "broken.wav", std::ios::binary);
    bad << "not really audio";
    bad.close();

    PrepareOptions opt;
    opt.in_dir = in.string();
    opt.out_dir = out.string();
    CHECK(cmd_prepare(opt) == kExitOk); // warnings, not failure
    auto j = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(j["clips"].size() == 3);
    REQUIRE(j["errors"].size() == 1);
    CHECK(std::string(j["errors"][0]).find("broken.wav") != std::string::npos);
    for (const auto& c : j["clips"]) {
        Mat32 m = read_feature_f32((out / c["file"].get<std::string>()).string());
        CHECK(m.rows == 80);
        CHECK(m.cols == c["frames"].get<int>());
    }
}

TEST_CASE("train: missing manifest is a clear data error") {
    RunConfig cfg;
    cfg.manifest = "/tmp/svgen_cli_nonexistent/manifest.json";
    cfg.run_dir = fresh_dir("train_missing").string();
    CHECK_THROWS_AS(cmd_train(cfg), data_error);
}

TEST_CASE("config loader rejects unknown keys and honors known ones") {
    const fs::path dir = fresh_dir("config");
    {
        std::ofstream f(dir / "ok.json");
        f << R"({"seed": 9, "width": 24, "cond_mode": "piano_roll"})";
    }
    RunConfig cfg = load_run_config((dir / "ok.json").string());
    CHECK(cfg.train.seed == 9);
    CHECK(cfg.train.width == 24);
    CHECK(cfg.train.mode == CondMode::kPianoRoll);
    {
        std::ofstream f(dir / "bad.json");
        f << R"({"seed": 9, "learning_rate": 0.1})";
    }
    CHECK_THROWS_AS(load_run_config((dir / "bad.json").string()), data_error);
}

TEST_CASE("train: the committed smoke trace is reproduced exactly") {
    const fs::path run = fresh_dir("train_smoke");
    RunConfig cfg;
    cfg.manifest = (kSource / "tests/data/smoke/manifest.json").string();
    cfg.run_dir = run.string();
    cfg.train.seed = 5;
    cfg.train.width = 16;
    cfg.train.noise_dim = 6;
    cfg.train.epochs = 2;
    cfg.train.val_fraction = 0.1;
    CHECK(cmd_train(cfg) == kExitOk);

    CHECK(slurp(run / "log.csv") == slurp(kSource / "tests/data/smoke/expected_log.csv"));
    CHECK(fs::exists(run / "config.json"));
    CHECK(fs::exists(run / "checkpoints/epoch_0002.ckpt"));
    CHECK(fs::exists(run / "best_epoch.txt"));
}

TEST_CASE("train: resume from the epoch-1 checkpoint matches the uninterrupted trace") {
    const fs::path run1 = fresh_dir("train_resume_full"), run2 = fresh_dir("train_resume_part");
    RunConfig cfg;
    cfg.manifest = (kSource / "tests/data/smoke/manifest.json").string();
    cfg.train.seed = 5;
    cfg.train.width = 16;
    cfg.train.noise_dim = 6;
    cfg.train.val_fraction = 0.1;

    cfg.run_dir = run1.string();
    cfg.train.epochs = 2;
    CHECK(cmd_train(cfg) == kExitOk);

    cfg.run_dir = run2.string();
    cfg.train.epochs = 1;
    CHECK(cmd_train(cfg) == kExitOk);
    cfg.resume = (run2 / "checkpoints/epoch_0001.ckpt").string();
    cfg.train.epochs = 2;
    CHECK(cmd_train(cfg) == kExitOk);

    CHECK(slurp(run1 / "log.csv") == slurp(run2 / "log.csv"));
}

TEST_CASE("generate: free mode at 20 s emits 80 x 862") {
    const fs::path dir = fresh_dir("gen_free");
    GenerateOptions opt;
    opt.checkpoint = make_free_checkpoint(dir);
    opt.out = (dir / "out.ftns").string();
    opt.seconds = 20.0;
    CHECK(cmd_generate(opt) == kExitOk);
    Mat32 m = read_feature_f32(opt.out);
    CHECK(m.rows == 80);
    CHECK(m.cols == 862);

    // free mode rejects a condition
    opt.condition_path = opt.out;
    CHECK_THROWS_AS(cmd_generate(opt), data_error);
}

TEST_CASE("generate: piano-roll mode follows the roll length") {
    const fs::path dir = fresh_dir("gen_roll");
    TrainConfig cfg;
    cfg.width = 16;
    cfg.noise_dim = 6;
    cfg.val_fraction = 0.0;
    cfg.mode = CondMode::kPianoRoll;
    Rng rng(4);
    std::vector<ClipData> clips;
    for (int i = 0; i < 5; ++i) {
        ClipData c;
        c.mel = sample_gaussian<float>(rng, 80, 16);
        for (auto& v : c.mel.data) v = std::tanh(v);
        Mat32 roll(88, 16);
        for (int t = 0; t < 16; ++t) roll(40, t) = 1.0f;
        c.cond = std::move(roll);
        clips.push_back(std::move(c));
    }
    BeganTrainer t(cfg, std::move(clips));
    t.step();
    const std::string ckpt = (dir / "roll.ckpt").string();
    save_checkpoint(ckpt, t.model(), t.state(), t.rng().state(), MelNorm{-11.5, 1.0});

    Mat32 roll(88, 37);
    for (int t = 0; t < 37; ++t) roll(52, t) = 1.0f;
    const std::string roll_path = (dir / "cond.ftns").string();
    write_feature(roll_path, roll);

    GenerateOptions opt;
    opt.checkpoint = ckpt;
    opt.condition_path = roll_path;
    opt.out = (dir / "out.ftns").string();
    CHECK(cmd_generate(opt) == kExitOk);
    Mat32 m = read_feature_f32(opt.out);
    CHECK(m.cols == 37);

    // missing condition is an error in this mode
    opt.condition_path.clear();
    CHECK_THROWS_AS(cmd_generate(opt), data_error);
}

TEST_CASE("generate: solo mode auto-invokes the chord generator") {
    const fs::path dir = fresh_dir("gen_solo");
    TrainConfig cfg;
    cfg.width = 16;
    cfg.noise_dim = 6;
    cfg.val_fraction = 0.0;
    cfg.mode = CondMode::kChord;
    Rng rng(5);
    std::vector<ClipData> clips;
    for (int i = 0; i < 5; ++i) {
        ClipData c;
        c.mel = sample_gaussian<float>(rng, 80, 16);
        for (auto& v : c.mel.data) v = std::tanh(v);
        Mat32 cond(24, 16);
        for (int t = 0; t < 16; ++t) cond(i % 12, t) = 1.0f;
        c.cond = std::move(cond);
        clips.push_back(std::move(c));
    }
    BeganTrainer t(cfg, std::move(clips));
    t.step();
    const std::string ckpt = (dir / "solo.ckpt").string();
    save_checkpoint(ckpt, t.model(), t.state(), t.rng().state(), MelNorm{-11.5, 1.0});

    ChordModelConfig cm;
    cm.embed_dim = 16;
    cm.hidden_dim = 16;
    ChordModel chord(cm, 8);
    const std::string chord_ckpt = (dir / "chord.ckpt").string();
    save_chord_checkpoint(chord_ckpt, chord, 0);

    GenerateOptions opt;
    opt.checkpoint = ckpt;
    opt.out = (dir / "out.ftns").string();
    opt.seconds = 4.0;

    // without a condition or a chord generator: error
    CHECK_THROWS_AS(cmd_generate(opt), data_error);

    opt.chordgen_checkpoint = chord_ckpt;
    CHECK(cmd_generate(opt) == kExitOk);
    CHECK(fs::exists(dir / "out.ftns.chords.json")); // the sampled inner idea
    Mat32 m = read_feature_f32(opt.out);
    CHECK(m.rows == 80);
    CHECK(m.cols > 0);
}

TEST_CASE("evaluate: silent clips score vocalness 0 and empty pitch; rows match clips") {
    const fs::path dir = fresh_dir("eval");
    for (int i = 0; i < 3; ++i) {
        AudioClip silent;
        silent.sample_rate = kSampleRate;
        silent.samples.assign(22050, 0.0f);
        write_wav((dir / ("silent_" + std::to_string(i) + ".wav")).string(), silent);
    }
    EvaluateOptions opt;
    opt.dir = dir.string();
    CHECK(cmd_evaluate(opt) == kExitOk);
    std::ifstream f(dir / "metrics.csv");
    std::string line;
    std::getline(f, line);
    CHECK(line == "clip_id,avg_pitch,vocalness,matchness");
    int rows = 0;
    while (std::getline(f, line)) {
        ++rows;
        CHECK(line.substr(line.find(',', line.find(',') + 1)) == ",0,"); // vocalness 0, others empty
    }
    CHECK(rows == 3);
}
