#include <array>
#include <cstring>
#include <fstream>

#include "tailcast/trainer.hpp"

namespace tailcast {

namespace {

constexpr char kMagic[4] = {'T', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t crc32(const std::string& data) {
    static std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int j = 0; j < 8; ++j) c = (c & 1) ? 0xedb88320U ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xffffffffU;
    for (unsigned char byte : data) crc = table[(crc ^ byte) & 0xffU] ^ (crc >> 8);
    return crc ^ 0xffffffffU;
}

class Writer {
public:
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void f64s(const std::vector<double>& v) {
        u64(v.size());
        if (!v.empty()) raw(v.data(), v.size() * 8);
    }
    const std::string& data() const { return buf_; }

private:
    void raw(const void* p, std::size_t n) {
        buf_.append(static_cast<const char*>(p), n);
    }
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string data) : buf_(std::move(data)) {}
    std::uint8_t u8() { std::uint8_t v; raw(&v, 1); return v; }
    std::uint32_t u32() { std::uint32_t v; raw(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, 8); return v; }
    double f64() { double v; raw(&v, 8); return v; }
    std::vector<double> f64s() {
        const std::uint64_t n = u64();
        if (n > buf_.size() / 8) throw ChecksumMismatch("checkpoint: corrupt vector length");
        std::vector<double> v(n);
        if (n) raw(v.data(), n * 8);
        return v;
    }
    bool exhausted() const { return pos_ == buf_.size(); }

private:
    void raw(void* p, std::size_t n) {
        if (pos_ + n > buf_.size()) throw ChecksumMismatch("checkpoint: truncated file");
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::string buf_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    Writer w;
    w.u32(kVersion);
    w.u32(ckpt.kind == Checkpoint::ModelKind::Ar ? 1 : 2);
    if (ckpt.kind == Checkpoint::ModelKind::Ar) {
        w.u32(static_cast<std::uint32_t>(ckpt.ar.order));
        w.f64(ckpt.ar.intercept);
        w.f64(ckpt.ar.noise_std);
        w.f64s(ckpt.ar.coeffs);
    } else {
        const auto& s = ckpt.rnn;
        w.u32(static_cast<std::uint32_t>(s.model.hidden_size));
        w.u32(static_cast<std::uint32_t>(s.model.k));
        w.u32(static_cast<std::uint32_t>(s.model.h));
        w.f64s(s.model.params);
        w.u8(ckpt.has_train_state ? 1 : 0);
        if (ckpt.has_train_state) {
            w.u64(s.adam_t);
            w.f64s(s.adam_m);
            w.f64s(s.adam_v);
            w.u32(static_cast<std::uint32_t>(s.epochs_completed));
            w.f64(s.gpd.xi);
            w.f64(s.gpd.eta);
            w.u8(s.gpd_initialized ? 1 : 0);
            for (int i = 0; i < 4; ++i) w.u64(s.rng_state[i]);
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot write " + path);
    out.write(kMagic, 4);
    const std::uint32_t crc = crc32(w.data());
    out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    out.write(reinterpret_cast<const char*>(&crc), 4);
    if (!out) throw IoError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < 8 || std::memcmp(data.data(), kMagic, 4) != 0) {
        throw ChecksumMismatch("checkpoint: bad magic in " + path);
    }
    std::uint32_t stored = 0;
    std::memcpy(&stored, data.data() + data.size() - 4, 4);
    const std::string payload = data.substr(4, data.size() - 8);
    if (crc32(payload) != stored) {
        throw ChecksumMismatch("checkpoint: checksum mismatch in " + path);
    }

    Reader r(payload);
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw ChecksumMismatch("checkpoint: unsupported version " + std::to_string(version));
    }
    Checkpoint ckpt;
    const std::uint32_t kind = r.u32();
    if (kind == 1) {
        ckpt.kind = Checkpoint::ModelKind::Ar;
        ckpt.ar.order = static_cast<int>(r.u32());
        ckpt.ar.intercept = r.f64();
        ckpt.ar.noise_std = r.f64();
        ckpt.ar.coeffs = r.f64s();
    } else if (kind == 2) {
        ckpt.kind = Checkpoint::ModelKind::Rnn;
        auto& s = ckpt.rnn;
        s.model.hidden_size = static_cast<int>(r.u32());
        s.model.k = static_cast<int>(r.u32());
        s.model.h = static_cast<int>(r.u32());
        s.model.params = r.f64s();
        ckpt.has_train_state = r.u8() != 0;
        if (ckpt.has_train_state) {
            s.adam_t = r.u64();
            s.adam_m = r.f64s();
            s.adam_v = r.f64s();
            s.epochs_completed = static_cast<int>(r.u32());
            s.gpd.xi = r.f64();
            s.gpd.eta = r.f64();
            s.gpd_initialized = r.u8() != 0;
            for (int i = 0; i < 4; ++i) s.rng_state[i] = r.u64();
        }
    } else {
        throw ChecksumMismatch("checkpoint: unknown model kind " + std::to_string(kind));
    }
    if (!r.exhausted()) throw ChecksumMismatch("checkpoint: trailing bytes in " + path);
    return ckpt;
}

}  // namespace tailcast
