#pragma once

#include "psct/aes.h"
#include "psct/vcd.h"

#include <string>
#include <vector>

namespace psct::testkit {

/// MSB-first binary string of the low `width` bits of v.
inline std::string bits_of(unsigned v, std::size_t width) {
    std::string s(width, '0');
    for (std::size_t i = 0; i < width; ++i)
        if (v >> i & 1)
            s[width - 1 - i] = '1';
    return s;
}

/// Sixteen byte registers loaded with s9 on even edges and the ciphertext on
/// odd ones, so cycle 2i+1 carries exactly the last-round HD of encryption i.
inline vcd::VcdDocument aes_register_doc(const std::vector<aes::RoundTrace>& traces) {
    vcd::VcdDocument doc;
    doc.timescale = {1, "ns"};
    doc.signals["c"] = {"aes.clk", 1, {}};
    doc.declaration_order.push_back("c");
    for (int b = 0; b < 16; ++b) {
        const std::string code = "s" + std::to_string(b);
        doc.signals[code] = {"aes.state_b" + std::string(b < 10 ? "0" : "") + std::to_string(b), 8, {}};
        doc.declaration_order.push_back(code);
    }
    doc.signals["k"] = {"aes.round", 4, {}};
    doc.declaration_order.push_back("k");
    std::uint64_t t = 0;
    doc.events.push_back({0, "c", "0"});
    doc.events.push_back({0, "k", "0000"});
    for (int b = 0; b < 16; ++b)
        doc.events.push_back({0, "s" + std::to_string(b), "00000000"});
    for (const auto& tr : traces) {
        for (int half = 0; half < 2; ++half) {
            t += 5;
            doc.events.push_back({t, "c", "1"});
            const auto& st = half == 0 ? tr.before_last_round() : tr.ciphertext();
            for (int b = 0; b < 16; ++b)
                doc.events.push_back({t, "s" + std::to_string(b), bits_of(st.bytes[b], 8)});
            doc.events.push_back({t, "k", half == 0 ? "1001" : "1010"});
            t += 5;
            doc.events.push_back({t, "c", "0"});
        }
    }
    return doc;
}

} // namespace psct::testkit
