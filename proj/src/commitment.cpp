#include "keyforge/commitment.hpp"

#include <openssl/hmac.h>

#include <nlohmann/json.hpp>

namespace keyforge {

std::vector<std::uint8_t> encode_codeword(const Codeword& c) {
  std::vector<std::uint8_t> out;
  out.reserve(c.symbols.size() * 4);
  for (std::uint32_t s : c.symbols) {
    out.push_back(static_cast<std::uint8_t>(s >> 24));
    out.push_back(static_cast<std::uint8_t>(s >> 16));
    out.push_back(static_cast<std::uint8_t>(s >> 8));
    out.push_back(static_cast<std::uint8_t>(s));
  }
  return out;
}

Digest prf(const Codeword& c, std::span<const std::uint8_t> input) {
  const std::vector<std::uint8_t> key = encode_codeword(c);
  Digest out{};
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
            input.data(), input.size(), out.data(), &len) ||
      len != out.size())
    throw Error("HMAC-SHA-256 failed");
  return out;
}

std::vector<std::uint8_t> tag_input() { return {0x00}; }

std::vector<std::uint8_t> key_input(std::string_view z) {
  if (z.empty()) throw ValidationError("key derivation input z must be non-empty");
  std::vector<std::uint8_t> out;
  out.reserve(4 + z.size());
  const std::uint32_t len = static_cast<std::uint32_t>(z.size());
  out.push_back(static_cast<std::uint8_t>(len >> 24));
  out.push_back(static_cast<std::uint8_t>(len >> 16));
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  out.push_back(static_cast<std::uint8_t>(len));
  out.insert(out.end(), z.begin(), z.end());
  return out;
}

std::pair<Commitment, Codeword> commit(const FeatureVector& x,
                                       const SpcCode& code, Rng& rng) {
  code.validate();
  if (static_cast<int>(x.values.size()) != code.n)
    throw ValidationError("feature vector length != code length");
  if (x.d != code.d)
    throw ValidationError("feature vector bit width != code bit width");

  Codeword c = sample_codeword(code, rng);
  Commitment com;
  com.code = code;
  com.delta = sub_mod(x.values, c.symbols, code.d);
  com.tag = prf(c, tag_input());
  return {std::move(com), std::move(c)};
}

std::optional<DerivedKey> decommit(const FeatureVector& y,
                                   const Commitment& com, std::string_view z) {
  if (static_cast<int>(y.values.size()) != com.code.n)
    throw ValidationError("feature vector length != code length");
  if (y.d != com.code.d)
    throw ValidationError("feature vector bit width != code bit width");
  const std::vector<std::uint8_t> zin = key_input(z);  // validates z up front

  Codeword candidate = decode(sub_mod(y.values, com.delta, com.code.d), com.code);
  if (prf(candidate, tag_input()) != com.tag) return std::nullopt;
  return DerivedKey{prf(candidate, zin)};
}

DerivedKey derive_key(const Codeword& c, std::string_view z) {
  return DerivedKey{prf(c, key_input(z))};
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw ParseError("hex string with odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ParseError(std::string("bad hex digit: ") + c);
  };
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return out;
}

nlohmann::json Commitment::to_json() const {
  return nlohmann::json{{"tag", to_hex(tag)},
                        {"delta", delta},
                        {"code", code.to_json()}};
}

Commitment Commitment::from_json(const nlohmann::json& j) {
  Commitment com;
  const auto tag_bytes = from_hex(j.at("tag").get<std::string>());
  if (tag_bytes.size() != com.tag.size()) throw ParseError("tag must be 32 bytes");
  std::copy(tag_bytes.begin(), tag_bytes.end(), com.tag.begin());
  com.delta = j.at("delta").get<Symbols>();
  com.code = SpcCode::from_json(j.at("code"));
  const std::uint64_t limit = 1ull << com.code.d;
  if (static_cast<int>(com.delta.size()) != com.code.n)
    throw ParseError("delta length != code length");
  for (std::uint32_t v : com.delta)
    if (v >= limit) throw ParseError("delta entry out of range");
  return com;
}

}  // namespace keyforge
