#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "keyforge/errors.hpp"
#include "keyforge/features.hpp"
#include "keyforge/rng.hpp"

namespace keyforge {

// ---------------------------------------------------------------------------
// Scaled parity code over Z_{2^d}
//
// A vector c is a codeword iff s_i divides c_i for every symbol and
// sum(c_i / s_i) is even. Scalings are powers of two, s_i = 2^{l_i}; the
// last symbol needs l_n >= 1 so the parity constraint has a bit to live in.
// ---------------------------------------------------------------------------

struct SpcCode {
  int n = 0;           // symbol count
  int d = 8;           // bit width of Z_{2^d}
  std::vector<int> l;  // per-symbol scaling exponents, s_i = 2^{l_i}

  std::uint32_t scaling(std::size_t i) const { return 1u << l[i]; }

  /// Throws ValidationError unless n >= 1, 2 <= d <= 24, 0 <= l_i <= d-1
  /// for i < n and 1 <= l_n <= d-1.
  void validate() const;

  nlohmann::json to_json() const;
  static SpcCode from_json(const nlohmann::json& j);

  friend bool operator==(const SpcCode&, const SpcCode&) = default;
};

using Symbols = std::vector<std::uint32_t>;

struct Codeword {
  Symbols symbols;

  friend bool operator==(const Codeword&, const Codeword&) = default;
};

// ---------------------------------------------------------------------------
// Lee metric
// ---------------------------------------------------------------------------

/// Lee weight of a single element: |x'| for the representative x' of x with
/// -2^{d-1} < x' <= 2^{d-1}.
std::uint64_t lee_weight(std::uint32_t x, int d);

/// Lee weight of a vector: sum of element weights.
std::uint64_t lee_weight(std::span<const std::uint32_t> x, int d);

std::uint64_t lee_distance(std::span<const std::uint32_t> x,
                           std::span<const std::uint32_t> y, int d);

/// Elementwise (a - b) mod 2^d.
Symbols sub_mod(std::span<const std::uint32_t> a,
                std::span<const std::uint32_t> b, int d);

/// Elementwise (a + b) mod 2^d.
Symbols add_mod(std::span<const std::uint32_t> a,
                std::span<const std::uint32_t> b, int d);

// ---------------------------------------------------------------------------
// Code construction and decoding
// ---------------------------------------------------------------------------

/// Builds the scaling profile from per-feature standard deviations:
/// s'_i = discretize(sigma_i * kappa), then the nearest power of two
/// (ties round down), floored at 1, capped at 2^{d-1}; the last scaling is
/// lifted to at least 2.
SpcCode derive_scaling(std::span<const double> sigma, double kappa, int d,
                       const DiscretizeRange& range);

/// Same, with one range per feature (used after a projection, where each
/// component has its own span).
SpcCode derive_scaling(std::span<const double> sigma, double kappa, int d,
                       std::span<const DiscretizeRange> ranges);

/// Nearest power of two to v, minimum 1; equidistant values round down.
std::uint32_t nearest_power_of_two(std::uint32_t v);

/// Draws a codeword uniformly from the code: free top bits for every symbol,
/// with the last symbol's lowest free bit fixed to make the scaled sum even.
Codeword sample_codeword(const SpcCode& code, Rng& rng);

bool is_codeword(std::span<const std::uint32_t> v, const SpcCode& code);

/// Decodes gamma to a codeword: per-symbol residues become signed errors
/// (residues strictly above s_i/2 go negative), the error is subtracted, and
/// an odd parity is repaired at the symbol with the largest relative error
/// (ties at the lowest index, sign(0) treated as +). Output always satisfies
/// is_codeword.
Codeword decode(std::span<const std::uint32_t> gamma, const SpcCode& code);

/// log2 of the number of codewords: sum(d - l_i) - 1 (one bit is spent on
/// the parity constraint).
int log2_codeword_count(const SpcCode& code);

/// Enumerates the full code. Intended for tests; feasible only when
/// log2_codeword_count is small.
std::vector<Codeword> enumerate_codewords(const SpcCode& code);

}  // namespace keyforge
