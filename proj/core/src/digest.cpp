#include "psct/digest.h"

#include "psct/hex.h"

#include <openssl/sha.h>

namespace psct {

Digest sha256(std::span<const std::uint8_t> data) {
    Digest out{};
    SHA256(data.data(), data.size(), out.data());
    return out;
}

Digest sha256(std::string_view text) {
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string digest_hex(const Digest& d) { return to_hex(d); }

} // namespace psct
