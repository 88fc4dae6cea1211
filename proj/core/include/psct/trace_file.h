#pragma once

#include "psct/digest.h"
#include "psct/power.h"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace psct::io {

/// Binary trace container, little-endian throughout:
///
///   "XVLT" | u16 version | u64 n_traces | u16 samples_per_trace |
///   32B scenario_hash | u64 master_seed | u32 params_len | params (5 x f64) |
///   u16 label_len | label | n x 16B ciphertexts | n x f64 powers
inline constexpr std::uint16_t kTraceFileVersion = 1;
inline constexpr std::uint32_t kParamsBlockBytes = 40;

/// Header size for a given scenario label length.
constexpr std::size_t trace_header_size(std::size_t label_len) {
    return 4 + 2 + 8 + 2 + 32 + 8 + 4 + kParamsBlockBytes + 2 + label_len;
}

struct TraceFile {
    power::TracePool pool;
    Digest scenario_hash{};
};

/// Trace identities are not stored; a loaded pool is in identity order.
std::vector<std::uint8_t> encode_trace_file(const power::TracePool& pool, const Digest& scenario_hash);

/// Throws DataError on bad magic, unsupported version, truncation, trailing
/// bytes or an empty payload.
TraceFile decode_trace_file(std::span<const std::uint8_t> bytes);

void write_trace_file(const std::string& path, const power::TracePool& pool,
                      const Digest& scenario_hash);
TraceFile read_trace_file(const std::string& path);

} // namespace psct::io
