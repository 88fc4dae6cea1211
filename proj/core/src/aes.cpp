#include "psct/aes.h"

#include <stdexcept>
#include <string>

namespace psct::aes {

namespace {

constexpr std::array<std::uint8_t, 256> kSbox = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
};

constexpr std::array<std::uint8_t, 256> make_inverse(const std::array<std::uint8_t, 256>& box) {
    std::array<std::uint8_t, 256> inv{};
    for (std::size_t i = 0; i < 256; ++i)
        inv[box[i]] = static_cast<std::uint8_t>(i);
    return inv;
}

constexpr std::array<std::uint8_t, 256> kInvSbox = make_inverse(kSbox);

constexpr std::array<std::uint8_t, 11> kRcon = {0x00, 0x01, 0x02, 0x04, 0x08, 0x10,
                                               0x20, 0x40, 0x80, 0x1b, 0x36};

constexpr std::uint8_t xtime(std::uint8_t x) {
    return static_cast<std::uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1b : 0x00));
}

void sub_bytes(Bytes16& s) {
    for (auto& b : s)
        b = kSbox[b];
}

void shift_rows(Bytes16& s) {
    const Bytes16 in = s;
    for (std::size_t i = 0; i < kBlockBytes; ++i)
        s[i] = in[last_round_source(i)];
}

void mix_columns(Bytes16& s) {
    for (std::size_t c = 0; c < 4; ++c) {
        std::uint8_t* col = &s[4 * c];
        const std::uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
        const std::uint8_t all = a0 ^ a1 ^ a2 ^ a3;
        col[0] = a0 ^ all ^ xtime(a0 ^ a1);
        col[1] = a1 ^ all ^ xtime(a1 ^ a2);
        col[2] = a2 ^ all ^ xtime(a2 ^ a3);
        col[3] = a3 ^ all ^ xtime(a3 ^ a0);
    }
}

void add_round_key(Bytes16& s, const AesKey& k) {
    for (std::size_t i = 0; i < kBlockBytes; ++i)
        s[i] ^= k.bytes[i];
}

} // namespace

std::uint8_t sbox(std::uint8_t x) { return kSbox[x]; }
std::uint8_t inv_sbox(std::uint8_t x) { return kInvSbox[x]; }

std::array<AesKey, kRounds + 1> expand_key(const AesKey& key) {
    std::array<AesKey, kRounds + 1> rk{};
    rk[0] = key;
    for (std::size_t r = 1; r <= kRounds; ++r) {
        const Bytes16& prev = rk[r - 1].bytes;
        Bytes16& cur = rk[r].bytes;
        // RotWord + SubWord on the last word of the previous round key.
        std::array<std::uint8_t, 4> t = {kSbox[prev[13]], kSbox[prev[14]], kSbox[prev[15]],
                                         kSbox[prev[12]]};
        t[0] ^= kRcon[r];
        for (std::size_t i = 0; i < 4; ++i)
            cur[i] = prev[i] ^ t[i];
        for (std::size_t i = 4; i < 16; ++i)
            cur[i] = prev[i] ^ cur[i - 4];
    }
    return rk;
}

AesKey last_round_key(const AesKey& key) { return expand_key(key)[kRounds]; }

AesKey invert_key_schedule(const AesKey& round10) {
    AesKey cur = round10;
    for (std::size_t r = kRounds; r >= 1; --r) {
        AesKey prev;
        // Words 1..3 of the previous key follow from consecutive words of this one.
        for (std::size_t i = 15; i >= 4; --i)
            prev.bytes[i] = cur.bytes[i] ^ cur.bytes[i - 4];
        const std::array<std::uint8_t, 4> t = {
            static_cast<std::uint8_t>(kSbox[prev.bytes[13]] ^ kRcon[r]), kSbox[prev.bytes[14]],
            kSbox[prev.bytes[15]], kSbox[prev.bytes[12]]};
        for (std::size_t i = 0; i < 4; ++i)
            prev.bytes[i] = cur.bytes[i] ^ t[i];
        cur = prev;
    }
    return cur;
}

RoundTrace encrypt_block(const AesKey& key, const AesState& plaintext) {
    const auto rk = expand_key(key);
    RoundTrace trace;
    Bytes16 s = plaintext.bytes;
    add_round_key(s, rk[0]);
    trace.states[0].bytes = s;
    for (std::size_t r = 1; r <= kRounds; ++r) {
        sub_bytes(s);
        shift_rows(s);
        if (r != kRounds)
            mix_columns(s);
        add_round_key(s, rk[r]);
        trace.states[r].bytes = s;
    }
    return trace;
}

std::uint8_t invert_last_round_byte(std::uint8_t cipher_byte, std::uint8_t key_guess,
                                    std::size_t byte_index) {
    if (byte_index >= kBlockBytes)
        throw std::out_of_range("byte_index " + std::to_string(byte_index) + " >= 16");
    return kInvSbox[cipher_byte ^ key_guess];
}

} // namespace psct::aes
