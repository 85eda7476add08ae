#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "keyforge/protocol.hpp"

namespace keyforge::pplda {

// Frame layout: 4-byte big-endian length of the rest, 1-byte version (0x01),
// 1-byte round tag, JSON payload with hex-encoded fixed-width ciphertexts.

inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::uint32_t kMaxFrameBytes = 1u << 30;

/// Serializes a message into a complete frame (length prefix included).
std::vector<std::uint8_t> wire_encode(const ProtocolMessage& msg,
                                      const PublicKey& pk);

/// Parses one complete frame. Throws WireError on truncation, bad version,
/// bad tag or malformed payload.
ProtocolMessage wire_decode(std::span<const std::uint8_t> frame,
                            const PublicKey& pk);

/// Size of the first complete frame in the buffer, or nullopt if more bytes
/// are needed. Throws WireError when the declared length is implausible.
std::optional<std::size_t> frame_size(std::span<const std::uint8_t> buffer);

}  // namespace keyforge::pplda
