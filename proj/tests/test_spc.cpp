#include <doctest.h>

#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "keyforge/spc.hpp"
#include "test_util.hpp"

using namespace keyforge;

TEST_CASE("lee weight of elements") {
  CHECK(lee_weight(7u, 3) == 1);  // 7 = -1 in Z_8
  CHECK(lee_weight(4u, 3) == 4);  // upper boundary stays positive
  CHECK(lee_weight(0u, 3) == 0);
  CHECK_THROWS_AS(lee_weight(8u, 3), ValidationError);
}

TEST_CASE("lee weight of vectors sums elements") {
  const Symbols v{7, 4, 1};
  CHECK(lee_weight(v, 3) == 6);
}

TEST_CASE("lee distance is a metric on small spaces") {
  const int d = 3;
  const std::uint32_t q = 1u << d;
  for (std::uint32_t a = 0; a < q; ++a)
    for (std::uint32_t b = 0; b < q; ++b) {
      const Symbols va{a}, vb{b};
      const auto dist = lee_distance(va, vb, d);
      CHECK(dist == lee_distance(vb, va, d));        // symmetry
      CHECK((dist == 0) == (a == b));                // identity
      for (std::uint32_t c = 0; c < q; ++c) {        // triangle
        const Symbols vc{c};
        CHECK(dist <= lee_distance(va, vc, d) + lee_distance(vc, vb, d));
      }
    }
}

TEST_CASE("nearest power of two, ties round down") {
  CHECK(nearest_power_of_two(0) == 1);
  CHECK(nearest_power_of_two(1) == 1);
  CHECK(nearest_power_of_two(3) == 2);  // 3-2 == 4-3, tie rounds down
  CHECK(nearest_power_of_two(40) == 32);
  CHECK(nearest_power_of_two(48) == 32);  // equidistant 32/64
  CHECK(nearest_power_of_two(49) == 64);
}

TEST_CASE("derive_scaling follows the discretize-then-round rule") {
  const DiscretizeRange range{0, 500};

  SUBCASE("zero deviation clamps to one") {
    const SpcCode code = derive_scaling(std::vector<double>{0.0, 0.0}, 1.0, 8, range);
    CHECK(code.l[0] == 0);
    CHECK(code.l[1] == 1);  // last symbol lifted for the parity bit
  }
  SUBCASE("hand-evaluated example") {
    // sigma 40 ms, kappa 2: discretize(80) = 40, nearest power 32.
    const SpcCode code = derive_scaling(std::vector<double>{40.0, 40.0}, 2.0, 8, range);
    CHECK(code.scaling(0) == 32);
    CHECK(code.l[0] == 5);
  }
  SUBCASE("equidistant scaled value rounds down") {
    // discretize(94.2) = floor(255*94.2/500) = 48, equidistant to 32 and 64.
    CHECK(discretize(94.2, 8, range) == 48);
    const SpcCode code = derive_scaling(std::vector<double>{94.2, 94.2}, 1.0, 8, range);
    CHECK(code.scaling(0) == 32);
  }
  SUBCASE("cap at 2^{d-1}") {
    const SpcCode code = derive_scaling(std::vector<double>{1e9, 1e9}, 1.0, 8, range);
    CHECK(code.scaling(0) == 128);
    CHECK(code.scaling(1) == 128);
  }
  CHECK_THROWS_AS(derive_scaling(std::vector<double>{1.0}, 0.0, 8, range),
                  ValidationError);
}

TEST_CASE("is_codeword checks divisibility and parity") {
  SpcCode code;
  code.n = 2;
  code.d = 4;
  code.l = {2, 2};  // s = (4, 4)
  CHECK(is_codeword(Symbols{0, 0}, code));
  CHECK_FALSE(is_codeword(Symbols{8, 4}, code));  // 2 + 1 odd
  CHECK(is_codeword(Symbols{8, 8}, code));        // 2 + 2 even
  CHECK_FALSE(is_codeword(Symbols{8, 2}, code));  // 4 does not divide 2
}

TEST_CASE("degenerate single-symbol code collapses to zero") {
  SpcCode code;
  code.n = 1;
  code.d = 2;
  code.l = {1};  // s = (2): parity forces c/2 even, so C = {0}
  const auto all = enumerate_codewords(code);
  REQUIRE(all.size() == 1);
  CHECK(all[0].symbols == Symbols{0});
  Rng rng(5);
  for (int i = 0; i < 50; ++i)
    CHECK(sample_codeword(code, rng).symbols == Symbols{0});
}

TEST_CASE("codeword count matches the free-bit formula") {
  SpcCode code;
  code.n = 2;
  code.d = 3;
  code.l = {1, 1};  // s = (2, 2)
  const auto all = enumerate_codewords(code);
  CHECK(all.size() == 8);  // 2^{(3-1)+(3-1)} / 2
  CHECK(log2_codeword_count(code) == 3);

  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const SpcCode c = testutil::random_code(rng, 3, 5);
    if (log2_codeword_count(c) > 12) continue;
    CHECK(enumerate_codewords(c).size() == (1u << log2_codeword_count(c)));
  }
}

TEST_CASE("sampled codewords are valid and uniform") {
  SpcCode code;
  code.n = 2;
  code.d = 3;
  code.l = {1, 1};
  Rng rng(23);

  std::map<Symbols, int> counts;
  const int draws = 10'000;
  for (int i = 0; i < draws; ++i) {
    const Codeword c = sample_codeword(code, rng);
    REQUIRE(is_codeword(c.symbols, code));
    ++counts[c.symbols];
  }
  CHECK(counts.size() == 8);
  // Chi-squared against uniform over 8 cells: 7 dof, 0.999 quantile ~ 24.3.
  const double expected = draws / 8.0;
  double chi2 = 0;
  for (const auto& [symbols, count] : counts)
    chi2 += (count - expected) * (count - expected) / expected;
  CHECK(chi2 < 24.3);
}

TEST_CASE("sampler output is always a codeword") {
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const SpcCode code = testutil::random_code(rng);
    const Codeword c = sample_codeword(code, rng);
    CHECK(is_codeword(c.symbols, code));
  }
}

TEST_CASE("decode hand traces") {
  SpcCode code;
  code.n = 2;
  code.d = 4;
  code.l = {2, 2};  // s = (4, 4)

  SUBCASE("identity on codewords") {
    const Symbols cw{12, 4};
    REQUIRE(is_codeword(cw, code));
    CHECK(decode(cw, code).symbols == cw);
  }
  SUBCASE("error subtraction with even parity") {
    // e = (1, -1), c' = (8, 8), parity 2+2 even.
    CHECK(decode(Symbols{9, 7}, code).symbols == Symbols{8, 8});
  }
  SUBCASE("parity repair at the max relative error") {
    // e = (-1, 2), c' = (12, 8), parity 3+2 odd, k = 2, +s_2.
    CHECK(decode(Symbols{11, 10}, code).symbols == Symbols{12, 12});
  }
}

TEST_CASE("decode output always satisfies is_codeword") {
  Rng rng(41);
  for (int trial = 0; trial < 2000; ++trial) {
    const SpcCode code = testutil::random_code(rng);
    Symbols gamma(static_cast<std::size_t>(code.n));
    for (auto& g : gamma)
      g = static_cast<std::uint32_t>(rng.uniform(1ull << code.d));
    CHECK(is_codeword(decode(gamma, code).symbols, code));
  }
}

TEST_CASE("bounded errors decode back to the codeword") {
  Rng rng(43);
  for (int trial = 0; trial < 20'000; ++trial) {
    const SpcCode code = testutil::random_code(rng);
    const Codeword c = sample_codeword(code, rng);
    const auto err = testutil::bounded_error(code, rng);
    REQUIRE(testutil::satisfies_error_bound(code, err));
    const Symbols gamma = testutil::apply_error(c.symbols, err, code.d);
    CHECK(decode(gamma, code).symbols == c.symbols);
  }
}

TEST_CASE("decode finds a Lee-nearest codeword on small spaces") {
  SpcCode code;
  code.n = 2;
  code.d = 3;
  code.l = {1, 1};  // uniform scaling: relative and raw orderings agree
  const auto all = enumerate_codewords(code);
  for (std::uint32_t a = 0; a < 8; ++a)
    for (std::uint32_t b = 0; b < 8; ++b) {
      const Symbols gamma{a, b};
      const Codeword got = decode(gamma, code);
      std::uint64_t best = UINT64_MAX;
      for (const auto& cw : all)
        best = std::min(best, lee_distance(gamma, cw.symbols, code.d));
      CHECK(lee_distance(gamma, got.symbols, code.d) == best);
    }
}

TEST_CASE("mixed scalings repair parity by relative, not raw, error") {
  // The parity repair targets the largest |e_i| / s_i. With s = (1, 4) and
  // gamma = (0, 3), that yields (0, 0): normalized distance 3/4, beating
  // (1, 4) at 1/1 + 1/4, even though (1, 4) is closer in the raw Lee metric.
  SpcCode code;
  code.n = 2;
  code.d = 3;
  code.l = {0, 2};
  CHECK(decode(Symbols{0, 3}, code).symbols == Symbols{0, 0});
  CHECK(is_codeword(Symbols{1, 4}, code));
  CHECK(lee_distance(Symbols{0, 3}, Symbols{1, 4}, 3) == 2);
  CHECK(lee_distance(Symbols{0, 3}, Symbols{0, 0}, 3) == 3);
}

TEST_CASE("SpcCode JSON round trip is bit exact") {
  SpcCode code;
  code.n = 3;
  code.d = 8;
  code.l = {0, 5, 3};
  const SpcCode back = SpcCode::from_json(code.to_json());
  CHECK(back == code);
  CHECK(back.to_json().dump() == code.to_json().dump());
}

TEST_CASE("SpcCode validation rejects bad shapes") {
  SpcCode code;
  code.n = 2;
  code.d = 8;
  code.l = {0, 0};
  CHECK_THROWS_AS(code.validate(), ValidationError);  // last needs parity room
  code.l = {8, 1};
  CHECK_THROWS_AS(code.validate(), ValidationError);  // exponent above d-1
  code.l = {0};
  CHECK_THROWS_AS(code.validate(), ValidationError);  // length mismatch
}
