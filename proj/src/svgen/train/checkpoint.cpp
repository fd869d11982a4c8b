#include "svgen/train/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "svgen/core/crc32.hpp"

namespace svgen {

namespace {

// ---- little-endian buffer writer/reader -------------------------------------

struct Writer {
    std::vector<uint8_t> buf;

    void u8(uint8_t v) { buf.push_back(v); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
    void f64(double v) {
        uint64_t b;
        std::memcpy(&b, &v, 8);
        u64(b);
    }
    void bytes(const void* p, size_t n) {
        const size_t at = buf.size();
        buf.resize(at + n);
        std::memcpy(buf.data() + at, p, n);
    }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
};

struct Reader {
    const uint8_t* p;
    const uint8_t* end;

    void need(size_t n) const {
        if (static_cast<size_t>(end - p) < n) throw data_error("checkpoint: unexpected end of data");
    }
    uint8_t u8() {
        need(1);
        return *p++;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
        p += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
        p += 8;
        return v;
    }
    int64_t i64() { return static_cast<int64_t>(u64()); }
    double f64() {
        const uint64_t b = u64();
        double v;
        std::memcpy(&v, &b, 8);
        return v;
    }
    std::string str() {
        const uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(p), n);
        p += n;
        return s;
    }
};

void write_blob(Writer& w, const std::string& name, const Mat32& m) {
    w.str(name);
    w.u8(0); // f32
    w.u32(static_cast<uint32_t>(m.rows));
    w.u32(static_cast<uint32_t>(m.cols));
    w.bytes(m.data.data(), m.data.size() * 4);
}

Mat32 read_blob(Reader& r, std::string& name) {
    name = r.str();
    const uint8_t dtype = r.u8();
    const uint32_t rows = r.u32();
    const uint32_t cols = r.u32();
    const size_t count = static_cast<size_t>(rows) * cols;
    Mat32 m(static_cast<int>(rows), static_cast<int>(cols));
    if (dtype == 0) {
        r.need(count * 4);
        std::memcpy(m.data.data(), r.p, count * 4);
        r.p += count * 4;
    } else if (dtype == 1) {
        r.need(count * 8);
        for (size_t i = 0; i < count; ++i) {
            double v;
            std::memcpy(&v, r.p + i * 8, 8);
            m.data[i] = static_cast<float>(v);
        }
        r.p += count * 8;
    } else {
        throw data_error("checkpoint: unknown blob dtype");
    }
    return m;
}

void write_store(Writer& w, const std::string& prefix, const ParamStore<float>& ps) {
    for (size_t i = 0; i < ps.size(); ++i) {
        const auto& p = ps.at(i);
        write_blob(w, prefix + p.name, p.value);
        write_blob(w, prefix + p.name + "#m1", p.m1);
        write_blob(w, prefix + p.name + "#m2", p.m2);
    }
}

void write_rng(Writer& w, const Rng::State& s) {
    for (uint64_t v : s.s) w.u64(v);
    w.u8(s.has_spare ? 1 : 0);
    w.f64(s.spare);
}

Rng::State read_rng(Reader& r) {
    Rng::State s;
    for (auto& v : s.s) v = r.u64();
    s.has_spare = r.u8() != 0;
    s.spare = r.f64();
    return s;
}

std::vector<uint8_t> read_checked(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot open checkpoint: " + path);
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), "G3CK", 4) != 0) throw data_error("not a checkpoint file: " + path);
    uint32_t stored = 0;
    for (int i = 0; i < 4; ++i) stored |= static_cast<uint32_t>(buf[buf.size() - 4 + i]) << (8 * i);
    if (crc32(buf.data(), buf.size() - 4) != stored) throw data_error("checkpoint checksum mismatch: " + path);
    return buf;
}

void write_file(const std::string& path, Writer& w) {
    w.u32(crc32(w.buf.data(), w.buf.size()));
    std::ofstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot create checkpoint: " + path);
    f.write(reinterpret_cast<const char*>(w.buf.data()), static_cast<std::streamsize>(w.buf.size()));
    if (!f) throw data_error("failed writing checkpoint: " + path);
}

// Fills a freshly-constructed store from named blobs; every parameter must be
// present with matching shape, extras are rejected.
void restore_store(ParamStore<float>& ps, const std::string& prefix,
                   std::unordered_map<std::string, Mat32>& blobs) {
    auto take = [&](const std::string& name) {
        auto it = blobs.find(name);
        if (it == blobs.end()) throw data_error("checkpoint: missing parameter " + name);
        Mat32 m = std::move(it->second);
        blobs.erase(it);
        return m;
    };
    for (size_t i = 0; i < ps.size(); ++i) {
        auto& p = ps.at(i);
        Mat32 v = take(prefix + p.name);
        Mat32 m1 = take(prefix + p.name + "#m1");
        Mat32 m2 = take(prefix + p.name + "#m2");
        if (!v.same_shape(p.value)) throw data_error("checkpoint: shape mismatch for " + p.name);
        p.value = std::move(v);
        p.m1 = std::move(m1);
        p.m2 = std::move(m2);
        p.grad.fill(0.0f);
    }
}

constexpr uint8_t kKindBegan = 0;
constexpr uint8_t kKindChord = 1;

} // namespace

void save_checkpoint(const std::string& path, const G3BeganModel<float>& model, const TrainerState& state,
                     const Rng::State& rng, const MelNorm& norm) {
    Writer w;
    w.bytes("G3CK", 4);
    w.u32(kCheckpointVersion);

    const size_t blob_count = 3 * (model.g_params.size() + model.d_params.size());
    w.u32(static_cast<uint32_t>(blob_count));
    write_store(w, "g/", model.g_params);
    write_store(w, "d/", model.d_params);

    Writer st;
    st.u8(kKindBegan);
    st.u8(static_cast<uint8_t>(model.cfg.mode));
    st.u32(static_cast<uint32_t>(model.cfg.noise_dim));
    st.u32(static_cast<uint32_t>(model.cfg.width));
    st.u32(static_cast<uint32_t>(model.cfg.mel_bins));
    st.u8(model.cfg.activation_after_sum ? 1 : 0);
    st.f64(model.cfg.leaky_slope);
    st.i64(state.step);
    st.u32(static_cast<uint32_t>(state.epoch));
    st.f64(state.began.tau);
    st.f64(state.began.lambda);
    st.f64(state.began.gamma);
    write_rng(st, rng);
    st.f64(norm.cmin);
    st.f64(norm.cmax);
    st.u32(static_cast<uint32_t>(state.epoch_metric_history.size()));
    for (double v : state.epoch_metric_history) st.f64(v);

    w.u32(static_cast<uint32_t>(st.buf.size()));
    w.bytes(st.buf.data(), st.buf.size());
    write_file(path, w);
}

LoadedBegan load_checkpoint(const std::string& path) {
    std::vector<uint8_t> buf = read_checked(path);
    Reader r{buf.data() + 4, buf.data() + buf.size() - 4};
    const uint32_t version = r.u32();
    if (version != kCheckpointVersion) throw data_error("unsupported checkpoint version: " + path);

    const uint32_t blob_count = r.u32();
    std::unordered_map<std::string, Mat32> blobs;
    for (uint32_t i = 0; i < blob_count; ++i) {
        std::string name;
        Mat32 m = read_blob(r, name);
        blobs.emplace(std::move(name), std::move(m));
    }

    const uint32_t state_len = r.u32();
    r.need(state_len);
    Reader st{r.p, r.p + state_len};

    if (st.u8() != kKindBegan) throw data_error("checkpoint is not a singer model: " + path);
    LoadedBegan out;
    G3BeganConfig mc;
    mc.mode = static_cast<CondMode>(st.u8());
    mc.noise_dim = static_cast<int>(st.u32());
    mc.width = static_cast<int>(st.u32());
    mc.mel_bins = static_cast<int>(st.u32());
    mc.activation_after_sum = st.u8() != 0;
    mc.leaky_slope = st.f64();
    out.state.step = st.i64();
    out.state.epoch = static_cast<int>(st.u32());
    out.state.began.tau = st.f64();
    out.state.began.lambda = st.f64();
    out.state.began.gamma = st.f64();
    out.rng = read_rng(st);
    out.norm.cmin = st.f64();
    out.norm.cmax = st.f64();
    const uint32_t hist = st.u32();
    for (uint32_t i = 0; i < hist; ++i) out.state.epoch_metric_history.push_back(st.f64());

    Rng dummy(0);
    out.model = std::make_unique<G3BeganModel<float>>(mc, dummy);
    restore_store(out.model->g_params, "g/", blobs);
    restore_store(out.model->d_params, "d/", blobs);
    if (!blobs.empty()) throw data_error("checkpoint: unexpected extra parameters");

    out.cfg.noise_dim = mc.noise_dim;
    out.cfg.width = mc.width;
    out.cfg.mel_bins = mc.mel_bins;
    out.cfg.mode = mc.mode;
    out.cfg.activation_after_sum = mc.activation_after_sum;
    out.cfg.leaky_slope = mc.leaky_slope;
    out.cfg.lambda = out.state.began.lambda;
    out.cfg.gamma = out.state.began.gamma;
    return out;
}

void save_chord_checkpoint(const std::string& path, const ChordModel& model, int64_t step) {
    Writer w;
    w.bytes("G3CK", 4);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<uint32_t>(3 * model.params().size()));
    write_store(w, "c/", model.params());

    Writer st;
    st.u8(kKindChord);
    st.u8(model.config().melody_input ? 1 : 0);
    st.u32(static_cast<uint32_t>(model.config().embed_dim));
    st.u32(static_cast<uint32_t>(model.config().hidden_dim));
    st.i64(step);
    w.u32(static_cast<uint32_t>(st.buf.size()));
    w.bytes(st.buf.data(), st.buf.size());
    write_file(path, w);
}

LoadedChord load_chord_checkpoint(const std::string& path) {
    std::vector<uint8_t> buf = read_checked(path);
    Reader r{buf.data() + 4, buf.data() + buf.size() - 4};
    if (r.u32() != kCheckpointVersion) throw data_error("unsupported checkpoint version: " + path);

    const uint32_t blob_count = r.u32();
    std::unordered_map<std::string, Mat32> blobs;
    for (uint32_t i = 0; i < blob_count; ++i) {
        std::string name;
        Mat32 m = read_blob(r, name);
        blobs.emplace(std::move(name), std::move(m));
    }
    const uint32_t state_len = r.u32();
    r.need(state_len);
    Reader st{r.p, r.p + state_len};
    if (st.u8() != kKindChord) throw data_error("checkpoint is not a chord model: " + path);

    ChordModelConfig c;
    c.melody_input = st.u8() != 0;
    c.embed_dim = static_cast<int>(st.u32());
    c.hidden_dim = static_cast<int>(st.u32());
    LoadedChord out;
    out.step = st.i64();
    out.model = std::make_unique<ChordModel>(c, /*init_seed=*/0);
    restore_store(out.model->params(), "c/", blobs);
    if (!blobs.empty()) throw data_error("checkpoint: unexpected extra parameters");
    return out;
}

bool is_chord_checkpoint(const std::string& path) {
    std::vector<uint8_t> buf = read_checked(path);
    Reader r{buf.data() + 4, buf.data() + buf.size() - 4};
    r.u32(); // version
    const uint32_t blob_count = r.u32();
    for (uint32_t i = 0; i < blob_count; ++i) {
        std::string name;
        read_blob(r, name);
    }
    r.u32();
    Reader st{r.p, r.p + 1};
    return st.u8() == kKindChord;
}

} // namespace svgen
