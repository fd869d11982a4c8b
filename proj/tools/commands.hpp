#pragma once

#include <optional>
#include <string>

#include "svgen/train/trainer.hpp"

namespace svgen::cli {

// Exit codes shared by every subcommand.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct PrepareOptions {
    std::string in_dir;
    std::string out_dir;
    std::string cond_dir; // optional; pairs <stem>.ftns condition files
    double clip_seconds = 10.0;
    double vocal_ratio_min = 0.40;
    double activity_offset = 2.0;
};

struct RunConfig {
    TrainConfig train;
    std::string manifest;
    std::string run_dir = "run";
    int checkpoint_every = 1;
    std::string resume;
};

// Strict JSON config: unknown keys are rejected; the effective config is
// echoed into the run directory.
RunConfig load_run_config(const std::string& path);
void write_run_config(const std::string& path, const RunConfig& cfg);

struct GenerateOptions {
    std::string checkpoint;
    std::string out;            // mel feature file
    std::string wav;            // optional WAV preview via phase reconstruction
    std::string condition_path; // piano roll (.ftns) or chords (.json)
    std::string chordgen_checkpoint;
    double seconds = 20.0;
    uint64_t seed = 1;
    int griffin_lim_iters = 60;
};

struct EvaluateOptions {
    std::string dir;
    std::string mh_checkpoint; // optional; enables the matchness column
    std::string out_csv;       // default <dir>/metrics.csv
};

struct GradcheckOptions {
    double tol = 1e-4;
    double perturb = 0.0; // test fixture: corrupts one backward result
};

struct ChordTrainOptions {
    std::string sheets;
    std::string out;
    bool melody = false; // train the melody-harmonization variant
    bool augment = false;
    int steps = 500;
    double lr = 1e-3;
    uint64_t seed = 1;
};

struct ChordSampleOptions {
    std::string checkpoint;
    std::string out;
    int bars = 8;
    double temperature = 1.0;
    uint64_t seed = 1;
    int key_root = 0;
    bool minor = false;
    double tempo = 120.0;
    std::string time_sig = "4/4";
};

int cmd_prepare(const PrepareOptions& opt);
int cmd_train(const RunConfig& cfg);
int cmd_generate(const GenerateOptions& opt);
int cmd_evaluate(const EvaluateOptions& opt);
int cmd_gradcheck(const GradcheckOptions& opt);
int cmd_chord_train(const ChordTrainOptions& opt);
int cmd_chord_sample(const ChordSampleOptions& opt);

} // namespace svgen::cli
