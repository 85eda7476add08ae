#include <doctest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "keyforge/he.hpp"

using namespace keyforge;
using namespace keyforge::he;

namespace {

HeParams test_params(int modulus_bits = 512, int plaintext_bits = 65) {
  HeParams p;
  p.modulus_bits = modulus_bits;
  p.plaintext_bits = plaintext_bits;
  return p;
}

}  // namespace

TEST_CASE("encrypt-decrypt round trips") {
  Rng rng(1);
  auto [pk, sk] = keygen(test_params(), rng);
  HeOps ops(sk, rng);

  CHECK(ops.decrypt(ops.encrypt(0)) == 0);
  CHECK(ops.decrypt(ops.encrypt(42)) == 42);
  CHECK(ops.decrypt(ops.encrypt(-42)) == -42);

  // Encoding boundary: the all-ones t-bit pattern is the signed value -1.
  const mpz_class pattern = (mpz_class(1) << 65) - 1;
  const mpz_class as_signed = twos_complement_decode(pattern, 65);
  CHECK(as_signed == -1);
  CHECK(ops.decrypt(ops.encrypt(as_signed)) == -1);
  CHECK(twos_complement_encode(as_signed, 65) == pattern);

  // Window edges.
  const mpz_class half = mpz_class(1) << 64;
  CHECK(ops.decrypt(ops.encrypt(half - 1)) == half - 1);
  CHECK(ops.decrypt(ops.encrypt(-half)) == -half);
  CHECK_THROWS_AS(ops.encrypt(half), CapacityError);
  CHECK_THROWS_AS(ops.encrypt(-half - 1), CapacityError);

  for (int i = 0; i < 1000; ++i) {
    mpz_class v = rng.random_bits(64);
    if (rng.uniform(2)) v = -v;
    CHECK(ops.decrypt(ops.encrypt(v)) == v);
  }
}

TEST_CASE("signed window round trips exhaustively at a small plaintext size") {
  Rng rng(2);
  auto [pk, sk] = keygen(test_params(256, 9), rng);
  HeOps ops(sk, rng);
  for (long v = -256; v < 256; ++v)
    CHECK(ops.decrypt(ops.encrypt(v)) == v);
}

TEST_CASE("homomorphic addition and scalar multiplication") {
  Rng rng(3);
  auto [pk, sk] = keygen(test_params(), rng);
  HeOps ops(sk, rng);

  CHECK(ops.decrypt(ops.add(ops.encrypt(3), ops.encrypt(4))) == 7);
  CHECK(ops.decrypt(ops.scalar_mul(ops.encrypt(5), -2)) == -10);
  const Ciphertext a = ops.encrypt(123456);
  CHECK(ops.decrypt(ops.add(a, ops.encrypt(0))) == 123456);

  for (int i = 0; i < 500; ++i) {
    const std::int64_t x = rng.uniform_int(-1'000'000, 1'000'000);
    const std::int64_t y = rng.uniform_int(-1'000'000, 1'000'000);
    const std::int64_t k = rng.uniform_int(-1000, 1000);
    CHECK(ops.decrypt(ops.add(ops.encrypt(x), ops.encrypt(y))) == x + y);
    CHECK(ops.decrypt(ops.scalar_mul(ops.encrypt(x), k)) == x * k);
  }
}

TEST_CASE("ciphertexts under different keys do not mix") {
  Rng rng(4);
  auto [pk1, sk1] = keygen(test_params(), rng);
  auto [pk2, sk2] = keygen(test_params(), rng);
  HeOps ops1(sk1, rng);
  HeOps ops2(sk2, rng);
  const Ciphertext a = ops1.encrypt(1);
  const Ciphertext b = ops2.encrypt(2);
  CHECK_THROWS_AS(ops1.add(a, b), ValidationError);
  CHECK_THROWS_AS(ops2.decrypt(a), ValidationError);
}

TEST_CASE("rerandomize preserves the plaintext and changes the bytes") {
  Rng rng(5);
  auto [pk, sk] = keygen(test_params(), rng);
  HeOps ops(sk, rng);
  for (int i = 0; i < 200; ++i) {
    const mpz_class v = mpz_class(rng.uniform_int(-1000, 1000));
    Ciphertext c = ops.encrypt(v);
    Ciphertext r1 = ops.rerandomize(c);
    Ciphertext r2 = ops.rerandomize(r1);
    CHECK(ops.decrypt(r1) == v);
    CHECK(ops.decrypt(r2) == v);
    CHECK(r1.value != c.value);
    CHECK(r2.value != r1.value);
  }
}

TEST_CASE("equal plaintexts encrypt to distinct ciphertexts") {
  Rng rng(6);
  auto [pk, sk] = keygen(test_params(), rng);
  HeOps ops(pk, rng);
  std::set<std::string> seen;
  for (int i = 0; i < 1000; ++i)
    CHECK(seen.insert(ops.encrypt(7).value.get_str(16)).second);
}

TEST_CASE("a party without the secret key cannot decrypt") {
  Rng rng(7);
  auto [pk, sk] = keygen(test_params(), rng);
  HeOps encrypt_only(pk, rng);
  const Ciphertext c = encrypt_only.encrypt(5);
  CHECK_THROWS_AS(encrypt_only.decrypt(c), Error);
}

TEST_CASE("operation counters track calls") {
  Rng rng(8);
  auto [pk, sk] = keygen(test_params(), rng);
  OpCounters counters;
  HeOps ops(sk, rng, &counters);
  const Ciphertext a = ops.encrypt(1);
  const Ciphertext b = ops.encrypt(2);
  ops.decrypt(ops.add(a, b));
  ops.scalar_mul(a, 3);
  ops.rerandomize(a);
  CHECK(counters.encrypt == 2);
  CHECK(counters.add == 1);
  CHECK(counters.decrypt == 1);
  CHECK(counters.scalar_mul == 1);
  CHECK(counters.rerandomize == 1);
}

TEST_CASE("fixed-point codec") {
  FixedPointCodec codec;
  codec.fractional_bits = 8;
  codec.magnitude_bound = 1000;
  CHECK(encode_fixed(0.0, codec) == 0);
  CHECK(encode_fixed(1.5, codec) == 384);
  CHECK(encode_fixed(-1.5, codec) == -384);
  CHECK(decode_fixed(encode_fixed(3.25, codec), codec) == doctest::Approx(3.25));
  CHECK_THROWS_AS(encode_fixed(1001.0, codec), CapacityError);

  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform_real(-999, 999);
    const double back = decode_fixed(encode_fixed(x, codec), codec);
    CHECK(std::abs(back - x) <= std::ldexp(0.5, -codec.fractional_bits));
  }
}

TEST_CASE("capacity validation mirrors the protocol bounds") {
  const HeParams params = test_params(1024, 65);

  SUBCASE("the published operating point fits") {
    const auto report = validate_capacity(params, FixedPointCodec{0, 1e15}, 31, 500, 8);
    CHECK(report.ok);
  }
  SUBCASE("wide values with fractional bits blow the S_B bound") {
    const auto report = validate_capacity(params, FixedPointCodec{16, 1e15}, 31, 500, 24);
    CHECK_FALSE(report.ok);
    CHECK(report.binding_bound == "S_B accumulation");
    CHECK(report.required_bits > report.available_bits);
  }
  SUBCASE("no features is vacuously fine") {
    CHECK(validate_capacity(params, FixedPointCodec{}, 0, 500, 8).ok);
  }
}

TEST_CASE("key and ciphertext serialization round trips") {
  Rng rng(10);
  auto [pk, sk] = keygen(test_params(), rng);

  const PublicKey pk2 = PublicKey::from_json(pk.to_json());
  CHECK(pk2.modulus() == pk.modulus());
  CHECK(pk2.key_id() == pk.key_id());

  const SecretKey sk2 = SecretKey::from_json(sk.to_json());
  CHECK(sk2.lambda() == sk.lambda());

  HeOps ops(sk, rng);
  const Ciphertext c = ops.encrypt(-777);
  const auto bytes = ciphertext_bytes(c, pk);
  CHECK(bytes.size() == pk.ciphertext_bytes());  // fixed width
  const Ciphertext back = ciphertext_from_bytes(bytes, pk);
  CHECK(back.value == c.value);
  CHECK(ops.decrypt(back) == -777);
}

TEST_CASE("parameter parsing from the environment format") {
  HeParams p;
  p.validate();
  CHECK_THROWS_AS(
      [] {
        HeParams bad;
        bad.plaintext_bits = 600;
        bad.modulus_bits = 512;
        bad.validate();
      }(),
      ValidationError);
}
