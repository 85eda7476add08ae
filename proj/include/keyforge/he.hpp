#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "keyforge/errors.hpp"
#include "keyforge/rng.hpp"

namespace keyforge::he {

// Scheme parameters. plaintext_bits caps the usable signed window to
// [-2^{t-1}, 2^{t-1}); subgroup_bits is carried for parameter compatibility
// with subgroup-based schemes and does not affect this instantiation.
struct HeParams {
  int modulus_bits = 1024;
  int subgroup_bits = 160;
  int plaintext_bits = 65;

  void validate() const;

  /// Reads overrides from KEYFORGE_HE_PARAMS, e.g.
  /// "modulus_bits=512,plaintext_bits=65".
  static HeParams from_env_or_default();
};

// Per-role operation counters; the complexity checks are built on these.
struct OpCounters {
  std::uint64_t encrypt = 0;
  std::uint64_t decrypt = 0;
  std::uint64_t add = 0;
  std::uint64_t scalar_mul = 0;
  std::uint64_t rerandomize = 0;
};

struct Ciphertext {
  mpz_class value;
  std::uint64_t key_id = 0;
};

class PublicKey {
 public:
  PublicKey() = default;
  PublicKey(mpz_class modulus, HeParams params);

  const mpz_class& modulus() const { return n_; }
  const mpz_class& modulus_squared() const { return n_squared_; }
  const HeParams& params() const { return params_; }
  std::uint64_t key_id() const { return key_id_; }

  /// Serialized ciphertext width: fixed so message sizes depend only on the
  /// key, not the plaintext.
  std::size_t ciphertext_bytes() const {
    return (mpz_sizeinbase(n_squared_.get_mpz_t(), 2) + 7) / 8;
  }

  nlohmann::json to_json() const;
  static PublicKey from_json(const nlohmann::json& j);

 private:
  mpz_class n_, n_squared_;
  HeParams params_;
  std::uint64_t key_id_ = 0;
};

class SecretKey {
 public:
  SecretKey() = default;
  SecretKey(PublicKey pk, mpz_class lambda);

  const PublicKey& public_key() const { return pk_; }
  const mpz_class& lambda() const { return lambda_; }
  const mpz_class& mu() const { return mu_; }

  nlohmann::json to_json() const;
  static SecretKey from_json(const nlohmann::json& j);

 private:
  PublicKey pk_;
  mpz_class lambda_, mu_;
};

/// Generates a keypair. Encrypt-then-decrypt is the identity on the signed
/// plaintext window.
std::pair<PublicKey, SecretKey> keygen(const HeParams& params, Rng& rng);

/// Handle bundling a key, a randomness source and an operation counter.
/// A party constructed without the secret key cannot decrypt.
class HeOps {
 public:
  HeOps(const PublicKey& pk, Rng& rng, OpCounters* counters = nullptr)
      : pk_(&pk), sk_(nullptr), rng_(&rng), counters_(counters) {}
  HeOps(const SecretKey& sk, Rng& rng, OpCounters* counters = nullptr)
      : pk_(&sk.public_key()), sk_(&sk), rng_(&rng), counters_(counters) {}

  const PublicKey& pk() const { return *pk_; }

  /// Encrypts a signed value in [-2^{t-1}, 2^{t-1}); throws CapacityError
  /// outside the window.
  Ciphertext encrypt(const mpz_class& value);

  /// Decrypts to the signed window. Requires the secret key.
  mpz_class decrypt(const Ciphertext& c) const;

  Ciphertext add(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext scalar_mul(const Ciphertext& a, const mpz_class& k) const;
  Ciphertext rerandomize(const Ciphertext& a);

 private:
  void check_key(const Ciphertext& c) const;

  const PublicKey* pk_;
  const SecretKey* sk_;
  Rng* rng_;
  OpCounters* counters_;
};

// ---------------------------------------------------------------------------
// Plaintext encoding
// ---------------------------------------------------------------------------

// Maps reals onto the integer plaintext space with f fractional bits.
struct FixedPointCodec {
  int fractional_bits = 0;
  double magnitude_bound = 1e15;
};

/// round(x * 2^f) as a signed integer; |x| must not exceed the bound.
mpz_class encode_fixed(double x, const FixedPointCodec& codec);
double decode_fixed(const mpz_class& v, const FixedPointCodec& codec);

/// Interprets a t-bit pattern as a signed value (top half negative).
mpz_class twos_complement_decode(const mpz_class& pattern, int plaintext_bits);
/// Inverse: signed value to its t-bit pattern.
mpz_class twos_complement_encode(const mpz_class& value, int plaintext_bits);

struct CapacityReport {
  bool ok = true;
  std::string binding_bound;  // name of the first violated bound
  long required_bits = 0;
  long available_bits = 0;
};

/// Static worst-case check that every protocol intermediate fits the signed
/// plaintext window: raw values (2^{d+f}), products of means (2^{2(d+f)}),
/// scatter-within sums (m_max * 2^{2(d+f)}) and the m^2-scaled
/// scatter-between accumulation (n * m_max^2 * 2^{2(d+f)}).
CapacityReport validate_capacity(const HeParams& params,
                                 const FixedPointCodec& codec, long n,
                                 long m_max, int d);

// ---------------------------------------------------------------------------
// Ciphertext serialization (fixed width, big-endian)
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> ciphertext_bytes(const Ciphertext& c, const PublicKey& pk);
Ciphertext ciphertext_from_bytes(const std::vector<std::uint8_t>& bytes,
                                 const PublicKey& pk);

}  // namespace keyforge::he
