#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace psct::aes {

inline constexpr std::size_t kBlockBytes = 16;
inline constexpr std::size_t kRounds = 10;

using Bytes16 = std::array<std::uint8_t, kBlockBytes>;

/// AES-128 cipher key (or a round key; see last_round_key()).
struct AesKey {
    Bytes16 bytes{};
    friend bool operator==(const AesKey&, const AesKey&) = default;
};

/// 128-bit state in standard column-major order: byte r + 4c is row r, column c.
struct AesState {
    Bytes16 bytes{};
    friend bool operator==(const AesState&, const AesState&) = default;
};

/// Register contents after each round's final AddRoundKey.
/// states[0] is the initial whitening output, states[10] the ciphertext.
struct RoundTrace {
    std::array<AesState, kRounds + 1> states{};

    const AesState& ciphertext() const { return states[kRounds]; }
    const AesState& before_last_round() const { return states[kRounds - 1]; }
};

std::uint8_t sbox(std::uint8_t x);
std::uint8_t inv_sbox(std::uint8_t x);

/// Key schedule: round_keys[0] is the cipher key, round_keys[10] the last-round key.
std::array<AesKey, kRounds + 1> expand_key(const AesKey& key);

/// Round-10 subkey, the target of a last-round attack.
AesKey last_round_key(const AesKey& key);

/// Recovers the cipher key from a round-10 subkey by running the schedule backwards.
AesKey invert_key_schedule(const AesKey& round10);

RoundTrace encrypt_block(const AesKey& key, const AesState& plaintext);

/// State position whose byte ShiftRows moves to ciphertext position `byte_index`.
///
/// All byte indices in the toolkit are ciphertext positions. The register that
/// held the pre-image of ciphertext byte b sits at last_round_source(b).
constexpr std::size_t last_round_source(std::size_t byte_index) {
    const std::size_t row = byte_index % 4;
    const std::size_t col = byte_index / 4;
    return row + 4 * ((col + row) % 4);
}

/// Undoes AddRoundKey and SubBytes for one ciphertext byte under a key guess.
///
/// The returned byte is the pre-final-round state byte that lives in register
/// position last_round_source(byte_index). Throws std::out_of_range when
/// byte_index >= 16.
std::uint8_t invert_last_round_byte(std::uint8_t cipher_byte, std::uint8_t key_guess,
                                    std::size_t byte_index);

} // namespace psct::aes
