#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace svgen;
using namespace svgen::cli;

int main(int argc, char** argv) {
    CLI::App app{"svgen: score- and lyrics-free singing voice generation"};
    app.require_subcommand(1);

    PrepareOptions prep;
    auto* prepare = app.add_subcommand("prepare", "extract mel features from WAV files and segment them");
    prepare->add_option("--in", prep.in_dir, "directory of input WAV files")->required();
    prepare->add_option("--out", prep.out_dir, "output feature directory")->required();
    prepare->add_option("--cond-dir", prep.cond_dir, "directory of per-track condition .ftns files");
    prepare->add_option("--clip-seconds", prep.clip_seconds, "sub-clip length in seconds");
    prepare->add_option("--vocal-ratio", prep.vocal_ratio_min, "minimum fraction of energy-active frames");
    prepare->add_option("--activity-offset", prep.activity_offset,
                        "frame activity threshold above the silence floor (nats)");

    std::string config_path, manifest_override, run_dir_override, resume_override;
    int epochs_override = -1;
    int64_t seed_override = -1;
    auto* train = app.add_subcommand("train", "adversarial training on prepared features");
    train->add_option("--config", config_path, "JSON config file");
    train->add_option("--manifest", manifest_override, "manifest path (overrides config)");
    train->add_option("--run-dir", run_dir_override, "run directory (overrides config)");
    train->add_option("--epochs", epochs_override, "epoch count (overrides config)");
    train->add_option("--seed", seed_override, "seed (overrides config)");
    train->add_option("--resume", resume_override, "checkpoint to resume from");

    GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "sample mel features (and optionally audio) from a checkpoint");
    generate->add_option("--checkpoint", gen.checkpoint, "singer checkpoint")->required();
    generate->add_option("--out", gen.out, "output mel feature file")->required();
    generate->add_option("--wav", gen.wav, "also synthesize a WAV preview");
    generate->add_option("--condition", gen.condition_path, "piano roll .ftns or chords .json");
    generate->add_option("--chordgen", gen.chordgen_checkpoint, "chord generator checkpoint (solo mode)");
    generate->add_option("--seconds", gen.seconds, "target length for unconditioned generation");
    generate->add_option("--seed", gen.seed, "noise seed");
    generate->add_option("--gl-iters", gen.griffin_lim_iters, "phase reconstruction iterations");

    EvaluateOptions ev;
    auto* evaluate = app.add_subcommand("evaluate", "objective metrics over a directory of WAV clips");
    evaluate->add_option("--dir", ev.dir, "directory of generated clips")->required();
    evaluate->add_option("--mh", ev.mh_checkpoint, "melody-harmonization checkpoint for matchness");
    evaluate->add_option("--out", ev.out_csv, "output CSV path");

    GradcheckOptions gc;
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference verification of all backward rules");
    gradcheck->add_option("--tol", gc.tol, "relative error tolerance");
    gradcheck->add_option("--perturb", gc.perturb, "fixture: corrupt one backward result by this amount");

    auto* chordgen = app.add_subcommand("chordgen", "chord progression model");
    chordgen->require_subcommand(1);
    ChordTrainOptions ct;
    auto* chord_train = chordgen->add_subcommand("train", "train on a lead-sheet corpus");
    chord_train->add_option("--sheets", ct.sheets, "lead sheet JSON file")->required();
    chord_train->add_option("--out", ct.out, "output checkpoint")->required();
    chord_train->add_flag("--mh", ct.melody, "train the melody-harmonization variant");
    chord_train->add_flag("--augment", ct.augment, "augment by rotating all 12 keys");
    chord_train->add_option("--steps", ct.steps, "optimizer steps");
    chord_train->add_option("--lr", ct.lr, "learning rate");
    chord_train->add_option("--seed", ct.seed, "seed");

    ChordSampleOptions cs;
    auto* chord_sample = chordgen->add_subcommand("sample", "sample a progression from a trained generator");
    chord_sample->add_option("--checkpoint", cs.checkpoint, "chord generator checkpoint")->required();
    chord_sample->add_option("--out", cs.out, "output chords JSON")->required();
    chord_sample->add_option("--bars", cs.bars, "bars to sample");
    chord_sample->add_option("--temperature", cs.temperature, "sampling temperature");
    chord_sample->add_option("--seed", cs.seed, "seed");
    chord_sample->add_option("--key-root", cs.key_root, "key root pitch class 0-11");
    chord_sample->add_flag("--minor", cs.minor, "minor key");
    chord_sample->add_option("--tempo", cs.tempo, "tempo in BPM");
    chord_sample->add_option("--time-sig", cs.time_sig, "time signature, e.g. 4/4");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*prepare) return cmd_prepare(prep);
        if (*train) {
            RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
            if (!manifest_override.empty()) cfg.manifest = manifest_override;
            if (!run_dir_override.empty()) cfg.run_dir = run_dir_override;
            if (!resume_override.empty()) cfg.resume = resume_override;
            if (epochs_override >= 0) cfg.train.epochs = epochs_override;
            if (seed_override >= 0) cfg.train.seed = static_cast<uint64_t>(seed_override);
            return cmd_train(cfg);
        }
        if (*generate) return cmd_generate(gen);
        if (*evaluate) return cmd_evaluate(ev);
        if (*gradcheck) return cmd_gradcheck(gc);
        if (*chord_train) return cmd_chord_train(ct);
        if (*chord_sample) return cmd_chord_sample(cs);
    } catch (const numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
