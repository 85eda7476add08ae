#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>

namespace keyforge {

/// Deterministic randomness source. All randomized operations (codeword
/// sampling, key generation, synthetic data) take an Rng so runs are
/// reproducible from a seed. The GMP state is kept in sync for big-integer
/// draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {
    gmp_randinit_mt(gmp_state_);
    gmp_randseed_ui(gmp_state_, static_cast<unsigned long>(seed ^ 0x9e3779b97f4a7c15ULL));
  }

  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;

  ~Rng() { gmp_randclear(gmp_state_); }

  static Rng from_entropy() {
    std::random_device rd;
    std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    return Rng(seed);
  }

  Rng(Rng&& other) noexcept : engine_(other.engine_) {
    gmp_randinit_set(gmp_state_, other.gmp_state_);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }

  double uniform_real(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double gaussian(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  /// Uniform mpz in [0, bound).
  mpz_class uniform_mpz(const mpz_class& bound) {
    mpz_class out;
    mpz_urandomm(out.get_mpz_t(), gmp_state_, bound.get_mpz_t());
    return out;
  }

  /// Uniform mpz with exactly `bits` random bits (value < 2^bits).
  mpz_class random_bits(unsigned bits) {
    mpz_class out;
    mpz_urandomb(out.get_mpz_t(), gmp_state_, bits);
    return out;
  }

  /// Derive an independent child stream; stable given the parent's state.
  Rng fork() { return Rng(next_u64() ^ 0xd1342543de82ef95ULL); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  gmp_randstate_t gmp_state_;
};

}  // namespace keyforge
