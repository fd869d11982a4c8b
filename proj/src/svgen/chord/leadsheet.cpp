#include "svgen/chord/leadsheet.hpp"

#include <fstream>

#include <json.hpp>

namespace svgen {

using nlohmann::json;

const std::vector<int>& tempo_options() {
    static const std::vector<int> opts = {60, 80, 100, 120, 140, 160, 180, 200, 220, 240};
    return opts;
}

const std::vector<std::pair<int, int>>& time_signatures() {
    static const std::vector<std::pair<int, int>> sigs = {{2, 4}, {3, 4}, {4, 4}, {2, 2}, {6, 8}, {12, 8}};
    return sigs;
}

int tempo_bucket(double bpm) {
    const auto& opts = tempo_options();
    int best = 0;
    double best_d = std::abs(bpm - opts[0]);
    for (size_t i = 1; i < opts.size(); ++i) {
        const double d = std::abs(bpm - opts[i]);
        if (d < best_d) {
            best = static_cast<int>(i);
            best_d = d;
        }
    }
    return best;
}

int time_signature_index(int num, int den) {
    const auto& sigs = time_signatures();
    for (size_t i = 0; i < sigs.size(); ++i) {
        if (sigs[i].first == num && sigs[i].second == den) return static_cast<int>(i);
    }
    throw data_error("unsupported time signature " + std::to_string(num) + "/" + std::to_string(den));
}

int beats_per_bar(int ts_index) {
    return time_signatures().at(ts_index).first;
}

int beat_position(int beat_index, int ts_index) {
    const int bpb = beats_per_bar(ts_index);
    return (beat_index % bpb) * (kBeatPositions / bpb);
}

Mat32 gen_condition(int key_root, bool minor, double bpm, int ts_index) {
    if (key_root < 0 || key_root >= 12) throw data_error("key root out of range");
    Mat32 c(kCondDim, 1);
    c(key_root + (minor ? 12 : 0), 0) = 1.0f;
    c(24 + tempo_bucket(bpm), 0) = 1.0f;
    c(34 + ts_index, 0) = 1.0f;
    return c;
}

Mat32 gen_condition(const LeadSheet& sheet) {
    return gen_condition(sheet.key_root, sheet.minor, sheet.tempo_bpm, sheet.ts_index);
}

namespace {

LeadSheet sheet_from_json(const json& j) {
    LeadSheet s;
    s.key_root = j.at("key_root").get<int>();
    const std::string mode = j.at("key_mode").get<std::string>();
    if (mode != "major" && mode != "minor") throw data_error("lead sheet: key_mode must be major or minor");
    s.minor = mode == "minor";
    s.tempo_bpm = j.at("tempo").get<double>();
    const std::string ts = j.at("time_sig").get<std::string>();
    const auto slash = ts.find('/');
    if (slash == std::string::npos) throw data_error("lead sheet: bad time_sig " + ts);
    s.ts_index = time_signature_index(std::stoi(ts.substr(0, slash)), std::stoi(ts.substr(slash + 1)));
    s.chords = j.at("chords").get<std::vector<int>>();
    s.melody = j.at("melody").get<std::vector<int>>();
    if (s.chords.size() != s.melody.size()) throw data_error("lead sheet: chords and melody lengths differ");
    if (s.chords.empty()) throw data_error("lead sheet: empty");
    for (int t : s.chords) {
        if (t < 0 || t >= kChordVocabSize) throw data_error("lead sheet: chord token out of range");
    }
    return s;
}

json sheet_to_json(const LeadSheet& s) {
    const auto& sig = time_signatures().at(s.ts_index);
    return json{{"key_root", s.key_root},
                {"key_mode", s.minor ? "minor" : "major"},
                {"tempo", s.tempo_bpm},
                {"time_sig", std::to_string(sig.first) + "/" + std::to_string(sig.second)},
                {"chords", s.chords},
                {"melody", s.melody}};
}

} // namespace

std::vector<LeadSheet> load_lead_sheets(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw data_error("cannot open lead sheet file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw data_error("lead sheet parse error in " + path + ": " + e.what());
    }
    std::vector<LeadSheet> sheets;
    for (const auto& js : j.at("sheets")) sheets.push_back(sheet_from_json(js));
    return sheets;
}

void save_lead_sheets(const std::string& path, const std::vector<LeadSheet>& sheets) {
    json j;
    j["sheets"] = json::array();
    for (const auto& s : sheets) j["sheets"].push_back(sheet_to_json(s));
    std::ofstream f(path);
    if (!f) throw data_error("cannot create lead sheet file: " + path);
    f << j.dump(1) << "\n";
}

std::vector<LeadSheet> augment_rotate_keys(const std::vector<LeadSheet>& sheets) {
    const auto& vocab = ChordVocab::instance();
    std::vector<LeadSheet> out;
    out.reserve(sheets.size() * 12);
    for (const auto& s : sheets) {
        for (int k = 0; k < 12; ++k) {
            LeadSheet r = s;
            r.key_root = (s.key_root + k) % 12;
            for (auto& tok : r.chords) tok = vocab.transpose(tok, k);
            for (auto& p : r.melody) {
                if (p > 0) p += k;
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

Mat32 melody_chroma(const std::vector<int>& melody) {
    Mat32 out(12, static_cast<int>(melody.size()));
    for (size_t i = 0; i < melody.size(); ++i) {
        if (melody[i] > 0) out(melody[i] % 12, static_cast<int>(i)) = 1.0f;
    }
    return out;
}

} // namespace svgen
