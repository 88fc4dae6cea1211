#include "psct/hex.h"

#include "psct/error.h"

namespace psct {

namespace {

int nibble(char c) {
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

} // namespace

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

std::vector<std::uint8_t> parse_hex(std::string_view text) {
    if (text.size() % 2 != 0)
        throw ConfigError("hex string has odd length: '" + std::string(text) + "'");
    std::vector<std::uint8_t> out(text.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = nibble(text[2 * i]);
        const int lo = nibble(text[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw ConfigError("invalid hex digit in '" + std::string(text) + "'");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

std::array<std::uint8_t, 16> parse_hex16(std::string_view text) {
    if (text.size() != 32)
        throw ConfigError("expected 32 hex digits, got " + std::to_string(text.size()));
    const auto bytes = parse_hex(text);
    std::array<std::uint8_t, 16> out{};
    for (std::size_t i = 0; i < 16; ++i)
        out[i] = bytes[i];
    return out;
}

} // namespace psct
