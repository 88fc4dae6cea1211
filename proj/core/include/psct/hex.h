#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psct {

std::string to_hex(std::span<const std::uint8_t> bytes);

/// Parses an even-length hex string. Throws ConfigError on bad characters or length.
std::vector<std::uint8_t> parse_hex(std::string_view text);

/// Parses exactly 32 hex digits into 16 octets.
std::array<std::uint8_t, 16> parse_hex16(std::string_view text);

} // namespace psct
