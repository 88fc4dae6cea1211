#include "psct/trace_file.h"

#include "psct/error.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace psct::io {

namespace {

constexpr char kMagic[4] = {'X', 'V', 'L', 'T'};

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    }
    template <typename T>
    void uint(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i)
            out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
    }
    void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

    std::vector<std::uint8_t> out;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::span<const std::uint8_t> take(std::size_t n, const char* what) {
        if (in_.size() - pos_ < n)
            throw DataError(std::string("trace file truncated in ") + what + " (offset " +
                            std::to_string(pos_) + ", file size " + std::to_string(in_.size()) + ")");
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    template <typename T>
    T uint(const char* what) {
        const auto s = take(sizeof(T), what);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
        return static_cast<T>(v);
    }
    double f64(const char* what) { return std::bit_cast<double>(uint<std::uint64_t>(what)); }

    std::size_t remaining() const { return in_.size() - pos_; }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> encode_trace_file(const power::TracePool& pool, const Digest& scenario_hash) {
    pool.validate();
    if (pool.scenario_label.size() > 0xffff)
        throw ConfigError("scenario label longer than 65535 bytes");

    Writer w;
    w.out.reserve(trace_header_size(pool.scenario_label.size()) + pool.size() * 24);
    w.bytes(kMagic, 4);
    w.uint<std::uint16_t>(kTraceFileVersion);
    w.uint<std::uint64_t>(pool.size());
    w.uint<std::uint16_t>(1);
    w.bytes(scenario_hash.data(), scenario_hash.size());
    w.uint<std::uint64_t>(pool.master_seed);
    w.uint<std::uint32_t>(kParamsBlockBytes);
    w.f64(pool.params.v_nominal);
    w.f64(pool.params.background_mean);
    w.f64(pool.params.background_jitter_sd);
    w.f64(pool.params.noise_sd);
    w.f64(pool.params.io_leak_weight);
    w.uint<std::uint16_t>(pool.scenario_label.size());
    w.bytes(pool.scenario_label.data(), pool.scenario_label.size());
    for (const auto& ct : pool.ciphertexts)
        w.bytes(ct.data(), ct.size());
    for (double p : pool.powers)
        w.f64(p);
    return std::move(w.out);
}

TraceFile decode_trace_file(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const auto magic = r.take(4, "magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0)
        throw DataError("not a trace file: bad magic");
    const auto version = r.uint<std::uint16_t>("version");
    if (version != kTraceFileVersion)
        throw DataError("unsupported trace file version " + std::to_string(version));
    const auto n = r.uint<std::uint64_t>("n_traces");
    const auto spt = r.uint<std::uint16_t>("samples_per_trace");
    if (spt != 1)
        throw DataError("unsupported samples_per_trace " + std::to_string(spt));

    TraceFile tf;
    const auto hash = r.take(32, "scenario hash");
    std::copy(hash.begin(), hash.end(), tf.scenario_hash.begin());
    auto& pool = tf.pool;
    pool.master_seed = r.uint<std::uint64_t>("master seed");
    const auto params_len = r.uint<std::uint32_t>("params length");
    if (params_len != kParamsBlockBytes)
        throw DataError("unexpected params block length " + std::to_string(params_len));
    pool.params.v_nominal = r.f64("params");
    pool.params.background_mean = r.f64("params");
    pool.params.background_jitter_sd = r.f64("params");
    pool.params.noise_sd = r.f64("params");
    pool.params.io_leak_weight = r.f64("params");
    const auto label_len = r.uint<std::uint16_t>("label length");
    const auto label = r.take(label_len, "label");
    pool.scenario_label.assign(label.begin(), label.end());

    if (n == 0)
        throw DataError("trace file has an empty payload");
    if (n > r.remaining() / 24)
        throw DataError("trace file truncated: header declares " + std::to_string(n) +
                        " traces but only " + std::to_string(r.remaining()) + " payload bytes follow");
    pool.ciphertexts.resize(n);
    for (auto& ct : pool.ciphertexts) {
        const auto s = r.take(16, "ciphertexts");
        std::copy(s.begin(), s.end(), ct.begin());
    }
    pool.powers.resize(n);
    for (auto& p : pool.powers)
        p = r.f64("powers");
    if (r.remaining() != 0)
        throw DataError("trace file has " + std::to_string(r.remaining()) + " trailing bytes");
    pool.validate();
    return tf;
}

void write_trace_file(const std::string& path, const power::TracePool& pool,
                      const Digest& scenario_hash) {
    const auto bytes = encode_trace_file(pool, scenario_hash);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw DataError("write to '" + path + "' failed");
}

TraceFile read_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open trace file '" + path + "'");
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
    return decode_trace_file(bytes);
}

} // namespace psct::io
