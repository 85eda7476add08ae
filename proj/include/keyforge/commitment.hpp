#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "keyforge/spc.hpp"

namespace keyforge {

using Digest = std::array<std::uint8_t, 32>;

struct DerivedKey {
  Digest key{};

  friend bool operator==(const DerivedKey&, const DerivedKey&) = default;
};

// Public pair protecting a codeword: tag = PRF_c(0) and offset
// delta = x - c (mod 2^d). Reveals only the low l_i bits of x.
struct Commitment {
  Digest tag{};
  Symbols delta;
  SpcCode code;

  nlohmann::json to_json() const;
  static Commitment from_json(const nlohmann::json& j);

  friend bool operator==(const Commitment&, const Commitment&) = default;
};

/// Canonical codeword byte encoding: each symbol as 4-byte big-endian,
/// concatenated. Normative for cross-implementation tag equality.
std::vector<std::uint8_t> encode_codeword(const Codeword& c);

/// HMAC-SHA-256 keyed with the canonical codeword encoding.
Digest prf(const Codeword& c, std::span<const std::uint8_t> input);

/// The tag PRF input: a single zero byte. Distinct from every key input,
/// which is length-prefixed and therefore at least five bytes.
std::vector<std::uint8_t> tag_input();

/// The key PRF input for a user-chosen z: 4-byte big-endian length followed
/// by the UTF-8 bytes. z must be non-empty.
std::vector<std::uint8_t> key_input(std::string_view z);

/// Commits to a fresh random codeword using biometric x. Returns the public
/// commitment and the codeword (which the caller may use to derive keys
/// immediately, and must otherwise discard).
std::pair<Commitment, Codeword> commit(const FeatureVector& x,
                                       const SpcCode& code, Rng& rng);

/// Reconstructs the key from biometric y: decodes y - delta and checks the
/// tag. Returns nullopt when the tag does not match; nothing about the
/// decoded candidate is revealed in that case.
std::optional<DerivedKey> decommit(const FeatureVector& y,
                                   const Commitment& com, std::string_view z);

/// Key derivation for a caller that already holds the codeword.
DerivedKey derive_key(const Codeword& c, std::string_view z);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);

}  // namespace keyforge
