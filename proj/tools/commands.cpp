#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "svgen/audio/condition.hpp"
#include "svgen/audio/feature_io.hpp"
#include "svgen/audio/griffinlim.hpp"
#include "svgen/audio/mel.hpp"
#include "svgen/audio/resample.hpp"
#include "svgen/audio/wav.hpp"
#include "svgen/eval/metrics.hpp"
#include "svgen/model/gradcheck_suite.hpp"
#include "svgen/train/checkpoint.hpp"

namespace svgen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<fs::path> sorted_files(const std::string& dir, const std::string& ext) {
    if (!fs::is_directory(dir)) throw data_error("not a directory: " + dir);
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

CondMode parse_cond_mode(const std::string& s) {
    if (s == "free") return CondMode::kFree;
    if (s == "piano_roll") return CondMode::kPianoRoll;
    if (s == "chord") return CondMode::kChord;
    throw data_error("unknown cond_mode: " + s + " (free | piano_roll | chord)");
}

struct ChordsFile {
    std::vector<int> tokens;
    double tempo = 120.0;
    int ts_index = 2;
    int key_root = 0;
    bool minor = false;
};

ChordsFile load_chords_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw data_error("cannot open chords file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw data_error("chords parse error in " + path + ": " + e.what());
    }
    ChordsFile c;
    c.tokens = j.at("tokens").get<std::vector<int>>();
    c.tempo = j.value("tempo", 120.0);
    if (j.contains("time_sig")) {
        const std::string ts = j["time_sig"].get<std::string>();
        const auto slash = ts.find('/');
        c.ts_index = time_signature_index(std::stoi(ts.substr(0, slash)), std::stoi(ts.substr(slash + 1)));
    }
    c.key_root = j.value("key_root", 0);
    c.minor = j.value("key_mode", std::string("major")) == "minor";
    for (int t : c.tokens) {
        if (t < 0 || t >= kChordVocabSize) throw data_error("chord token out of range in " + path);
    }
    if (c.tokens.empty()) throw data_error("empty chord progression in " + path);
    return c;
}

void save_chords_json(const std::string& path, const ChordsFile& c) {
    const auto& sig = time_signatures().at(c.ts_index);
    json j{{"tokens", c.tokens},
           {"tempo", c.tempo},
           {"time_sig", std::to_string(sig.first) + "/" + std::to_string(sig.second)},
           {"key_root", c.key_root},
           {"key_mode", c.minor ? "minor" : "major"}};
    std::ofstream f(path);
    if (!f) throw data_error("cannot create chords file: " + path);
    f << j.dump(1) << "\n";
}

void copy_store(ParamStore<float>& dst, const ParamStore<float>& src) {
    if (dst.size() != src.size()) throw data_error("parameter store mismatch on restore");
    for (size_t i = 0; i < dst.size(); ++i) {
        auto& d = dst.at(i);
        const auto& s = src.at(i);
        if (d.name != s.name || !d.value.same_shape(s.value)) throw data_error("parameter mismatch: " + d.name);
        d.value = s.value;
        d.m1 = s.m1;
        d.m2 = s.m2;
        d.grad.fill(0.0f);
    }
}

} // namespace

// ---- prepare -----------------------------------------------------------------

int cmd_prepare(const PrepareOptions& opt) {
    fs::create_directories(opt.out_dir);
    const auto wavs = sorted_files(opt.in_dir, ".wav");

    struct Track {
        std::string stem;
        Mat64 logmel;
        std::optional<Mat32> cond;
    };
    std::vector<Track> tracks;
    std::vector<std::string> errors;

    for (const auto& w : wavs) {
        try {
            AudioClip clip = resample(read_wav(w.string()), kSampleRate);
            if (clip.samples.empty()) throw data_error("empty audio: " + w.string());
            Track t;
            t.stem = w.stem().string();
            t.logmel = log_mel_spectrogram(clip);
            if (!opt.cond_dir.empty()) {
                const fs::path cond_path = fs::path(opt.cond_dir) / (t.stem + ".ftns");
                if (fs::exists(cond_path)) {
                    Mat32 cond = read_feature_f32(cond_path.string());
                    if (cond.cols != t.logmel.cols) {
                        throw data_error("condition frame count mismatch for " + t.stem + ": " +
                                         std::to_string(cond.cols) + " vs " + std::to_string(t.logmel.cols));
                    }
                    t.cond = std::move(cond);
                }
            }
            tracks.push_back(std::move(t));
        } catch (const std::exception& e) {
            errors.push_back(w.filename().string() + ": " + e.what());
            std::cerr << "warning: skipping " << w << ": " << e.what() << "\n";
        }
    }

    MelNorm norm{0.0, 0.0};
    bool first = true;
    for (const auto& t : tracks) {
        for (double v : t.logmel.data) {
            if (first) {
                norm.cmin = norm.cmax = v;
                first = false;
            }
            norm.cmin = std::min(norm.cmin, v);
            norm.cmax = std::max(norm.cmax, v);
        }
    }

    json clips = json::array();
    for (const auto& t : tracks) {
        MelSpec full{normalize_log_mel(t.logmel, norm), norm};
        std::vector<WindowInfo> info;
        auto windows = segment(full, opt.clip_seconds, opt.vocal_ratio_min, opt.activity_offset, &info);
        int kept_i = 0;
        for (const auto& w : info) {
            if (!w.kept) continue;
            char suffix[16];
            std::snprintf(suffix, sizeof(suffix), "_%03d", kept_i);
            const std::string id = t.stem + suffix;
            const std::string mel_file = id + ".ftns";
            write_feature((fs::path(opt.out_dir) / mel_file).string(), windows[kept_i].values);
            json entry{{"id", id}, {"file", mel_file}, {"frames", w.frames}};
            if (t.cond) {
                Mat32 cond_win(t.cond->rows, w.frames);
                for (int r = 0; r < t.cond->rows; ++r) {
                    for (int c = 0; c < w.frames; ++c) cond_win(r, c) = (*t.cond)(r, w.start + c);
                }
                const std::string cond_file = id + ".cond.ftns";
                write_feature((fs::path(opt.out_dir) / cond_file).string(), cond_win);
                entry["cond"] = cond_file;
            }
            clips.push_back(std::move(entry));
            ++kept_i;
        }
    }

    json manifest{{"version", 1},       {"sample_rate", kSampleRate}, {"n_fft", kNFft},
                  {"hop", kHop},        {"mel_bins", kMelBins},       {"norm_min", norm.cmin},
                  {"norm_max", norm.cmax}, {"clips", clips},          {"errors", errors}};
    std::ofstream mf(fs::path(opt.out_dir) / "manifest.json");
    mf << manifest.dump(1) << "\n";

    std::cout << "prepared " << clips.size() << " clips from " << tracks.size() << " tracks";
    if (!errors.empty()) std::cout << " (" << errors.size() << " files skipped)";
    std::cout << "\n";
    return kExitOk;
}

// ---- config ------------------------------------------------------------------

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw data_error("cannot open config: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw data_error("config parse error in " + path + ": " + e.what());
    }

    RunConfig cfg;
    const std::map<std::string, std::function<void(const json&)>> keys = {
        {"seed", [&](const json& v) { cfg.train.seed = v.get<uint64_t>(); }},
        {"lr", [&](const json& v) { cfg.train.lr = v.get<double>(); }},
        {"batch_size", [&](const json& v) { cfg.train.batch_size = v.get<int>(); }},
        {"grad_clip", [&](const json& v) { cfg.train.grad_clip = v.get<double>(); }},
        {"epochs", [&](const json& v) { cfg.train.epochs = v.get<int>(); }},
        {"lambda", [&](const json& v) { cfg.train.lambda = v.get<double>(); }},
        {"gamma", [&](const json& v) { cfg.train.gamma = v.get<double>(); }},
        {"tau0", [&](const json& v) { cfg.train.tau0 = v.get<double>(); }},
        {"noise_dim", [&](const json& v) { cfg.train.noise_dim = v.get<int>(); }},
        {"width", [&](const json& v) { cfg.train.width = v.get<int>(); }},
        {"cond_mode", [&](const json& v) { cfg.train.mode = parse_cond_mode(v.get<std::string>()); }},
        {"val_fraction", [&](const json& v) { cfg.train.val_fraction = v.get<double>(); }},
        {"activation_after_sum", [&](const json& v) { cfg.train.activation_after_sum = v.get<bool>(); }},
        {"leaky_slope", [&](const json& v) { cfg.train.leaky_slope = v.get<double>(); }},
        {"manifest", [&](const json& v) { cfg.manifest = v.get<std::string>(); }},
        {"run_dir", [&](const json& v) { cfg.run_dir = v.get<std::string>(); }},
        {"checkpoint_every", [&](const json& v) { cfg.checkpoint_every = v.get<int>(); }},
        {"resume", [&](const json& v) { cfg.resume = v.get<std::string>(); }},
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto k = keys.find(it.key());
        if (k == keys.end()) throw data_error("unknown config key: " + it.key());
        k->second(it.value());
    }
    return cfg;
}

void write_run_config(const std::string& path, const RunConfig& cfg) {
    json j{{"seed", cfg.train.seed},
           {"lr", cfg.train.lr},
           {"batch_size", cfg.train.batch_size},
           {"grad_clip", cfg.train.grad_clip},
           {"epochs", cfg.train.epochs},
           {"lambda", cfg.train.lambda},
           {"gamma", cfg.train.gamma},
           {"tau0", cfg.train.tau0},
           {"noise_dim", cfg.train.noise_dim},
           {"width", cfg.train.width},
           {"cond_mode", cond_mode_name(cfg.train.mode)},
           {"val_fraction", cfg.train.val_fraction},
           {"activation_after_sum", cfg.train.activation_after_sum},
           {"leaky_slope", cfg.train.leaky_slope},
           {"manifest", cfg.manifest},
           {"run_dir", cfg.run_dir},
           {"checkpoint_every", cfg.checkpoint_every},
           {"resume", cfg.resume}};
    std::ofstream f(path);
    if (!f) throw data_error("cannot write config echo: " + path);
    f << j.dump(1) << "\n";
}

// ---- train ---------------------------------------------------------------------

namespace {

struct Dataset {
    std::vector<ClipData> clips;
    MelNorm norm;
};

Dataset load_dataset(const std::string& manifest_path, CondMode mode) {
    std::ifstream f(manifest_path);
    if (!f) throw data_error("cannot open manifest: " + manifest_path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw data_error("manifest parse error: " + std::string(e.what()));
    }
    Dataset ds;
    ds.norm.cmin = j.at("norm_min").get<double>();
    ds.norm.cmax = j.at("norm_max").get<double>();
    const fs::path base = fs::path(manifest_path).parent_path();
    for (const auto& c : j.at("clips")) {
        ClipData clip;
        clip.mel = read_feature_f32((base / c.at("file").get<std::string>()).string());
        if (mode != CondMode::kFree) {
            if (!c.contains("cond")) throw data_error("clip " + c.at("id").get<std::string>() + " has no condition");
            Mat32 cond = read_feature_f32((base / c["cond"].get<std::string>()).string());
            if (mode == CondMode::kPianoRoll) cond = piano_roll_condition(cond, clip.mel.cols);
            if (cond.rows != cond_dim(mode)) throw data_error("condition rows mismatch in manifest");
            clip.cond = std::move(cond);
        }
        ds.clips.push_back(std::move(clip));
    }
    if (ds.clips.empty()) throw data_error("manifest has no clips");
    return ds;
}

} // namespace

int cmd_train(const RunConfig& cfg) {
    if (cfg.manifest.empty()) throw data_error("train: no manifest configured");
    Dataset ds = load_dataset(cfg.manifest, cfg.train.mode);

    fs::create_directories(fs::path(cfg.run_dir) / "checkpoints");
    write_run_config((fs::path(cfg.run_dir) / "config.json").string(), cfg);

    BeganTrainer trainer(cfg.train, std::move(ds.clips));
    int start_epoch = 0;
    if (!cfg.resume.empty()) {
        LoadedBegan loaded = load_checkpoint(cfg.resume);
        copy_store(trainer.model().g_params, loaded.model->g_params);
        copy_store(trainer.model().d_params, loaded.model->d_params);
        trainer.restore(loaded.state, loaded.rng);
        start_epoch = loaded.state.epoch;
        std::cout << "resumed from " << cfg.resume << " at epoch " << start_epoch << "\n";
    }

    const fs::path log_path = fs::path(cfg.run_dir) / "log.csv";
    std::ofstream log(log_path, cfg.resume.empty() ? std::ios::trunc : std::ios::app);
    if (cfg.resume.empty()) log << "step,epoch,lx,lg,lD,lG,tau,conv_metric\n";
    log.precision(9);

    try {
        for (int e = start_epoch; e < cfg.train.epochs; ++e) {
            trainer.run(1,
                        [&](const StepStats& s) {
                            log << s.step << "," << s.epoch << "," << s.lx << "," << s.lg << "," << s.l_d << ","
                                << s.l_g << "," << s.tau << "," << s.metric << "\n";
                        });
            log.flush();
            const double metric = trainer.state().epoch_metric_history.back();
            if (cfg.checkpoint_every > 0 && ((e + 1) % cfg.checkpoint_every == 0 || e + 1 == cfg.train.epochs)) {
                char name[32];
                std::snprintf(name, sizeof(name), "epoch_%04d.ckpt", e + 1);
                save_checkpoint((fs::path(cfg.run_dir) / "checkpoints" / name).string(), trainer.model(),
                                trainer.state(), trainer.rng().state(), ds.norm);
            }
            const int best = select_best_epoch(trainer.state().epoch_metric_history);
            {
                std::ofstream marker(fs::path(cfg.run_dir) / "best_epoch.txt");
                char name[32];
                std::snprintf(name, sizeof(name), "epoch_%04d.ckpt", best + 1);
                marker << "epoch " << (best + 1) << "\nmetric " << trainer.state().epoch_metric_history[best]
                       << "\ncheckpoint checkpoints/" << name << "\n";
            }
            std::cout << "epoch " << (e + 1) << "/" << cfg.train.epochs << " val_metric " << metric << "\n";
        }
    } catch (const numeric_error& e) {
        // Diagnostic dump before the nonzero exit.
        std::ofstream dump(fs::path(cfg.run_dir) / "abort_dump.txt");
        dump << "aborted: " << e.what() << "\nstep " << trainer.state().step << "\nepoch " << trainer.state().epoch
             << "\ntau " << trainer.state().began.tau << "\n";
        std::cerr << "error: " << e.what() << " (diagnostics in " << (fs::path(cfg.run_dir) / "abort_dump.txt")
                  << ")\n";
        return kExitNumeric;
    }
    return kExitOk;
}

// ---- generate --------------------------------------------------------------------

int cmd_generate(const GenerateOptions& opt) {
    LoadedBegan loaded = load_checkpoint(opt.checkpoint);
    G3BeganModel<float>& model = *loaded.model;
    const CondMode mode = model.cfg.mode;

    std::optional<Mat32> cond;
    std::optional<ChordsFile> chords;
    int frames = 0;

    if (mode == CondMode::kFree) {
        if (!opt.condition_path.empty()) throw data_error("generate: free-mode checkpoint takes no condition");
        frames = static_cast<int>(std::ceil(opt.seconds * kSampleRate / kHop));
    } else if (mode == CondMode::kPianoRoll) {
        if (opt.condition_path.empty()) throw data_error("generate: piano-roll mode needs --condition <roll.ftns>");
        Mat32 roll = read_feature_f32(opt.condition_path);
        frames = roll.cols;
        cond = piano_roll_condition(roll, frames);
    } else {
        ChordsFile c;
        if (!opt.condition_path.empty()) {
            c = load_chords_json(opt.condition_path);
        } else {
            // Solo singer: sample the inner idea from the chord generator.
            if (opt.chordgen_checkpoint.empty()) {
                throw data_error("generate: solo mode needs --condition <chords.json> or --chordgen <ckpt>");
            }
            LoadedChord cg = load_chord_checkpoint(opt.chordgen_checkpoint);
            if (cg.model->config().melody_input) throw data_error("generate: --chordgen expects a chord generator");
            const int bpb = beats_per_bar(2);
            const double beats = opt.seconds * c.tempo / 60.0;
            const int bars = std::max(1, static_cast<int>(std::ceil(beats / bpb)));
            c.tokens = cg.model->sample_progression(c.key_root, c.minor, c.tempo, c.ts_index, bars, 1.0, opt.seed);
        }
        frames = chord_condition_frames(static_cast<int>(c.tokens.size()), c.tempo);
        cond = chord_condition(c.tokens, c.tempo, frames);
        chords = std::move(c);
    }

    Rng rng(opt.seed);
    Mat32 z = sample_gaussian<float>(rng, model.cfg.noise_dim, frames);
    Mat32 mel = model.generate(z, cond ? &*cond : nullptr);
    write_feature(opt.out, mel);
    std::cout << "wrote " << opt.out << " (" << mel.rows << " x " << mel.cols << ")\n";

    if (chords) {
        const std::string chords_out = opt.out + ".chords.json";
        save_chords_json(chords_out, *chords);
        std::cout << "wrote " << chords_out << "\n";
    }
    if (!opt.wav.empty()) {
        MelSpec spec{mel, loaded.norm};
        AudioClip audio = griffin_lim(spec, opt.griffin_lim_iters);
        write_wav(opt.wav, audio);
        std::cout << "wrote " << opt.wav << " (" << audio.seconds() << " s)\n";
    }
    return kExitOk;
}

// ---- evaluate --------------------------------------------------------------------

int cmd_evaluate(const EvaluateOptions& opt) {
    const auto wavs = sorted_files(opt.dir, ".wav");
    std::unique_ptr<ChordModel> mh;
    if (!opt.mh_checkpoint.empty()) {
        LoadedChord loaded = load_chord_checkpoint(opt.mh_checkpoint);
        if (!loaded.model->config().melody_input) {
            throw data_error("evaluate: --mh checkpoint is not a melody-harmonization model");
        }
        mh = std::move(loaded.model);
    } else {
        std::cerr << "warning: no --mh checkpoint, matchness column left empty\n";
    }

    std::vector<EvalRow> rows;
    for (const auto& w : wavs) {
        EvalRow row;
        row.clip_id = w.stem().string();
        AudioClip clip = resample(read_wav(w.string()), kSampleRate);
        PitchTrack track = track_pitch(clip);
        try {
            row.vocalness = vocalness(track, nonsilent_frames(clip));
        } catch (const data_error&) {
            row.vocalness = 0.0; // fully silent clip
        }
        try {
            row.avg_pitch = average_pitch(track);
        } catch (const data_error&) {
            // left empty
        }
        if (mh) {
            const fs::path chords_path = fs::path(opt.dir) / (row.clip_id + ".chords.json");
            fs::path alt = w;
            alt += ".chords.json"; // matches generate's "<out>.chords.json"
            const fs::path use = fs::exists(chords_path) ? chords_path : alt;
            if (fs::exists(use)) {
                ChordsFile c = load_chords_json(use.string());
                row.matchness = audio_matchness(clip, c.tokens, *mh, c.tempo);
            } else {
                std::cerr << "warning: no chords file for " << row.clip_id << ", matchness left empty\n";
            }
        }
        rows.push_back(std::move(row));
    }

    const std::string out = opt.out_csv.empty() ? (fs::path(opt.dir) / "metrics.csv").string() : opt.out_csv;
    write_eval_csv(out, rows);
    std::cout << "wrote " << out << " (" << rows.size() << " rows)\n";
    return kExitOk;
}

// ---- gradcheck ---------------------------------------------------------------------

int cmd_gradcheck(const GradcheckOptions& opt) {
    const auto results = run_gradcheck_suite({1, 5, 17}, opt.tol, opt.perturb);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("%-34s max_rel_err %.3e  %s\n", r.name.c_str(), r.max_rel_err, r.pass ? "ok" : "FAIL");
        all_pass = all_pass && r.pass;
    }
    return all_pass ? kExitOk : kExitNumeric;
}

// ---- chordgen ---------------------------------------------------------------------

int cmd_chord_train(const ChordTrainOptions& opt) {
    std::vector<LeadSheet> sheets = load_lead_sheets(opt.sheets);
    if (opt.augment) {
        const size_t before = sheets.size();
        sheets = augment_rotate_keys(sheets);
        std::cout << "key rotation: " << before << " -> " << sheets.size() << " sheets\n";
    }
    ChordModelConfig cfg;
    cfg.melody_input = opt.melody;
    ChordModel model(cfg, opt.seed);
    ChordTrainConfig tc;
    tc.steps = opt.steps;
    tc.lr = opt.lr;
    tc.seed = opt.seed;
    const auto trace = train_chord_model(model, sheets, tc);
    save_chord_checkpoint(opt.out, model, opt.steps);
    std::cout << "trained " << (opt.melody ? "melody-harmonization" : "chord generator") << " for " << opt.steps
              << " steps, final NLL " << trace.back() << ", wrote " << opt.out << "\n";
    return kExitOk;
}

int cmd_chord_sample(const ChordSampleOptions& opt) {
    LoadedChord loaded = load_chord_checkpoint(opt.checkpoint);
    if (loaded.model->config().melody_input) throw data_error("chordgen sample: checkpoint is an MH model");
    const auto slash = opt.time_sig.find('/');
    if (slash == std::string::npos) throw data_error("bad time signature: " + opt.time_sig);
    const int ts = time_signature_index(std::stoi(opt.time_sig.substr(0, slash)),
                                        std::stoi(opt.time_sig.substr(slash + 1)));
    ChordsFile c;
    c.tokens = loaded.model->sample_progression(opt.key_root, opt.minor, opt.tempo, ts, opt.bars, opt.temperature,
                                                opt.seed);
    c.tempo = opt.tempo;
    c.ts_index = ts;
    c.key_root = opt.key_root;
    c.minor = opt.minor;
    save_chords_json(opt.out, c);
    std::cout << "wrote " << opt.out << " (" << c.tokens.size() << " chords)\n";
    return kExitOk;
}

} // namespace svgen::cli
