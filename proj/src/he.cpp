#include "keyforge/he.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

namespace keyforge::he {

namespace {

mpz_class pow2(long bits) {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), 2, static_cast<unsigned long>(bits));
  return out;
}

std::uint64_t derive_key_id(const mpz_class& n) {
  mpz_class mask = pow2(64) - 1;
  mpz_class low = n & mask;
  std::uint64_t id = 0;
  mpz_export(&id, nullptr, -1, sizeof(id), 0, 0, low.get_mpz_t());
  return id;
}

mpz_class random_prime(int bits, Rng& rng) {
  mpz_class p = rng.random_bits(static_cast<unsigned>(bits));
  // Force the top bit so the product has the requested size.
  mpz_setbit(p.get_mpz_t(), static_cast<mp_bitcnt_t>(bits - 1));
  mpz_class prime;
  mpz_nextprime(prime.get_mpz_t(), p.get_mpz_t());
  return prime;
}

}  // namespace

void HeParams::validate() const {
  if (modulus_bits < 128) throw ValidationError("modulus_bits too small");
  if (plaintext_bits < 2) throw ValidationError("plaintext_bits too small");
  if (plaintext_bits + 2 >= modulus_bits)
    throw ValidationError("plaintext space does not fit the modulus");
  if (subgroup_bits < 0 || subgroup_bits >= modulus_bits)
    throw ValidationError("bad subgroup_bits");
}

HeParams HeParams::from_env_or_default() {
  HeParams p;
  const char* env = std::getenv("KEYFORGE_HE_PARAMS");
  if (!env) return p;
  std::istringstream in(env);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("KEYFORGE_HE_PARAMS: expected key=value");
    std::string key = item.substr(0, eq);
    int value = std::stoi(item.substr(eq + 1));
    if (key == "modulus_bits")
      p.modulus_bits = value;
    else if (key == "subgroup_bits")
      p.subgroup_bits = value;
    else if (key == "plaintext_bits")
      p.plaintext_bits = value;
    else
      throw ParseError("KEYFORGE_HE_PARAMS: unknown key " + key);
  }
  p.validate();
  return p;
}

PublicKey::PublicKey(mpz_class modulus, HeParams params)
    : n_(std::move(modulus)), params_(params) {
  params_.validate();
  n_squared_ = n_ * n_;
  key_id_ = derive_key_id(n_);
}

SecretKey::SecretKey(PublicKey pk, mpz_class lambda)
    : pk_(std::move(pk)), lambda_(std::move(lambda)) {
  // With g = n + 1, L(g^lambda mod n^2) = lambda, so mu = lambda^{-1} mod n.
  if (mpz_invert(mu_.get_mpz_t(), lambda_.get_mpz_t(),
                 pk_.modulus().get_mpz_t()) == 0)
    throw ValidationError("lambda not invertible modulo n");
}

std::pair<PublicKey, SecretKey> keygen(const HeParams& params, Rng& rng) {
  params.validate();
  const int prime_bits = params.modulus_bits / 2;
  while (true) {
    mpz_class p = random_prime(prime_bits, rng);
    mpz_class q = random_prime(prime_bits, rng);
    if (p == q) continue;
    mpz_class n = p * q;
    mpz_class pm1 = p - 1, qm1 = q - 1;
    mpz_class lambda;
    mpz_lcm(lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
    mpz_class gcd;
    mpz_gcd(gcd.get_mpz_t(), lambda.get_mpz_t(), n.get_mpz_t());
    if (gcd != 1) continue;
    PublicKey pk(n, params);
    return {pk, SecretKey(pk, lambda)};
  }
}

void HeOps::check_key(const Ciphertext& c) const {
  if (c.key_id != pk_->key_id())
    throw ValidationError("ciphertext under a different key");
}

Ciphertext HeOps::encrypt(const mpz_class& value) {
  const mpz_class half = pow2(pk_->params().plaintext_bits - 1);
  if (value < -half || value >= half)
    throw CapacityError("plaintext outside the signed window");
  const mpz_class& n = pk_->modulus();
  const mpz_class& n2 = pk_->modulus_squared();

  mpz_class m = value >= 0 ? value : n + value;
  // g = n + 1: g^m = 1 + m n (mod n^2).
  mpz_class gm = (1 + m * n) % n2;
  mpz_class r = rng_->uniform_mpz(n - 1) + 1;
  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), n2.get_mpz_t());
  if (counters_) ++counters_->encrypt;
  return Ciphertext{(gm * rn) % n2, pk_->key_id()};
}

mpz_class HeOps::decrypt(const Ciphertext& c) const {
  if (!sk_) throw Error("this party holds no decryption key");
  check_key(c);
  const mpz_class& n = pk_->modulus();
  const mpz_class& n2 = pk_->modulus_squared();
  mpz_class u;
  mpz_powm(u.get_mpz_t(), c.value.get_mpz_t(), sk_->lambda().get_mpz_t(),
           n2.get_mpz_t());
  mpz_class l = (u - 1) / n;
  mpz_class m = (l * sk_->mu()) % n;
  if (counters_) ++counters_->decrypt;
  // Centered representative: top half of Z_n is negative.
  if (m * 2 >= n) m -= n;
  return m;
}

Ciphertext HeOps::add(const Ciphertext& a, const Ciphertext& b) const {
  check_key(a);
  check_key(b);
  if (counters_) ++counters_->add;
  return Ciphertext{(a.value * b.value) % pk_->modulus_squared(), a.key_id};
}

Ciphertext HeOps::scalar_mul(const Ciphertext& a, const mpz_class& k) const {
  check_key(a);
  const mpz_class& n2 = pk_->modulus_squared();
  mpz_class base = a.value;
  mpz_class exp = k;
  if (exp < 0) {
    // Negative scalars exponentiate the group inverse.
    if (mpz_invert(base.get_mpz_t(), base.get_mpz_t(), n2.get_mpz_t()) == 0)
      throw ValidationError("ciphertext not invertible");
    exp = -exp;
  }
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), n2.get_mpz_t());
  if (counters_) ++counters_->scalar_mul;
  return Ciphertext{std::move(out), a.key_id};
}

Ciphertext HeOps::rerandomize(const Ciphertext& a) {
  check_key(a);
  const mpz_class& n = pk_->modulus();
  const mpz_class& n2 = pk_->modulus_squared();
  mpz_class r = rng_->uniform_mpz(n - 1) + 1;
  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), n2.get_mpz_t());
  if (counters_) ++counters_->rerandomize;
  return Ciphertext{(a.value * rn) % n2, a.key_id};
}

mpz_class encode_fixed(double x, const FixedPointCodec& codec) {
  if (!std::isfinite(x)) throw ValidationError("cannot encode non-finite value");
  if (std::abs(x) > codec.magnitude_bound)
    throw CapacityError("value exceeds the fixed-point magnitude bound");
  const double scaled = x * std::ldexp(1.0, codec.fractional_bits);
  // Round half away from zero, then convert exactly.
  const double rounded = scaled >= 0 ? std::floor(scaled + 0.5) : std::ceil(scaled - 0.5);
  mpz_class out;
  mpz_set_d(out.get_mpz_t(), rounded);
  return out;
}

double decode_fixed(const mpz_class& v, const FixedPointCodec& codec) {
  return mpz_get_d(v.get_mpz_t()) * std::ldexp(1.0, -codec.fractional_bits);
}

mpz_class twos_complement_decode(const mpz_class& pattern, int plaintext_bits) {
  if (pattern < 0 || pattern >= pow2(plaintext_bits))
    throw ValidationError("pattern outside Z_2^t");
  mpz_class half = pow2(plaintext_bits - 1);
  return pattern >= half ? mpz_class(pattern - pow2(plaintext_bits)) : pattern;
}

mpz_class twos_complement_encode(const mpz_class& value, int plaintext_bits) {
  mpz_class half = pow2(plaintext_bits - 1);
  if (value < -half || value >= half)
    throw ValidationError("value outside the signed window");
  return value >= 0 ? value : mpz_class(value + pow2(plaintext_bits));
}

CapacityReport validate_capacity(const HeParams& params,
                                 const FixedPointCodec& codec, long n,
                                 long m_max, int d) {
  CapacityReport report;
  report.available_bits = params.plaintext_bits - 1;  // signed window
  if (n <= 0) return report;                          // nothing to encrypt
  if (m_max < 1 || d < 1) throw ValidationError("m_max and d must be >= 1");

  const long value_bits = d + codec.fractional_bits;
  const mpz_class value_bound = pow2(value_bits);
  const mpz_class product_bound = value_bound * value_bound;
  const mpz_class limit = pow2(params.plaintext_bits - 1);

  struct Bound {
    const char* name;
    mpz_class magnitude;
  };
  // Magnitudes grow along this list, so the first violation when scanning
  // from the largest is the binding constraint.
  const Bound bounds[] = {
      {"S_B accumulation", mpz_class(n) * m_max * m_max * product_bound},
      {"S_W accumulation", mpz_class(m_max) * product_bound},
      {"mean product", product_bound},
      {"value", value_bound},
  };
  for (const auto& b : bounds) {
    if (b.magnitude >= limit) {
      report.ok = false;
      report.binding_bound = b.name;
      report.required_bits =
          static_cast<long>(mpz_sizeinbase(b.magnitude.get_mpz_t(), 2));
      return report;
    }
  }
  return report;
}

std::vector<std::uint8_t> ciphertext_bytes(const Ciphertext& c,
                                           const PublicKey& pk) {
  const std::size_t width = pk.ciphertext_bytes();
  std::vector<std::uint8_t> out(width, 0);
  const std::size_t needed = (mpz_sizeinbase(c.value.get_mpz_t(), 2) + 7) / 8;
  if (needed > width) throw ValidationError("ciphertext wider than the key allows");
  std::size_t written = 0;
  mpz_export(out.data() + (width - needed), &written, 1, 1, 1, 0,
             c.value.get_mpz_t());
  return out;
}

Ciphertext ciphertext_from_bytes(const std::vector<std::uint8_t>& bytes,
                                 const PublicKey& pk) {
  if (bytes.size() != pk.ciphertext_bytes())
    throw WireError("ciphertext has wrong width for this key");
  Ciphertext c;
  mpz_import(c.value.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  if (c.value >= pk.modulus_squared())
    throw WireError("ciphertext value out of group range");
  c.key_id = pk.key_id();
  return c;
}

nlohmann::json PublicKey::to_json() const {
  return nlohmann::json{{"modulus_bits", params_.modulus_bits},
                        {"subgroup_bits", params_.subgroup_bits},
                        {"plaintext_bits", params_.plaintext_bits},
                        {"n", n_.get_str()}};
}

PublicKey PublicKey::from_json(const nlohmann::json& j) {
  HeParams params;
  params.modulus_bits = j.at("modulus_bits").get<int>();
  params.subgroup_bits = j.at("subgroup_bits").get<int>();
  params.plaintext_bits = j.at("plaintext_bits").get<int>();
  return PublicKey(mpz_class(j.at("n").get<std::string>()), params);
}

nlohmann::json SecretKey::to_json() const {
  nlohmann::json j = pk_.to_json();
  j["lambda"] = lambda_.get_str();
  return j;
}

SecretKey SecretKey::from_json(const nlohmann::json& j) {
  return SecretKey(PublicKey::from_json(j),
                   mpz_class(j.at("lambda").get<std::string>()));
}

}  // namespace keyforge::he
