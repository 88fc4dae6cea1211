#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace psct {

using Digest = std::array<std::uint8_t, 32>;

/// SHA-256 over raw bytes (OpenSSL backed).
Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view text);

std::string digest_hex(const Digest& d);

} // namespace psct
