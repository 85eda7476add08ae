#include "keyforge/spc.hpp"

#include <algorithm>
#include <cstdlib>

#include <nlohmann/json.hpp>

namespace keyforge {

namespace {

void check_entries(std::span<const std::uint32_t> v, int d) {
  const std::uint64_t limit = 1ull << d;
  for (std::uint32_t x : v)
    if (x >= limit)
      throw ValidationError("symbol " + std::to_string(x) + " out of Z_2^" +
                            std::to_string(d));
}

}  // namespace

void SpcCode::validate() const {
  if (n < 1) throw ValidationError("code needs at least one symbol");
  if (d < 2 || d > 24) throw ValidationError("bit width d must be in [2, 24]");
  if (static_cast<int>(l.size()) != n)
    throw ValidationError("scaling vector length != n");
  for (int i = 0; i < n; ++i) {
    if (l[i] < 0 || l[i] > d - 1)
      throw ValidationError("scaling exponent l[" + std::to_string(i) +
                            "] out of [0, d-1]");
  }
  if (l[n - 1] < 1)
    throw ValidationError("last scaling must be >= 2 to hold the parity bit");
}

nlohmann::json SpcCode::to_json() const {
  return nlohmann::json{{"n", n}, {"d", d}, {"l", l}};
}

SpcCode SpcCode::from_json(const nlohmann::json& j) {
  SpcCode code;
  code.n = j.at("n").get<int>();
  code.d = j.at("d").get<int>();
  code.l = j.at("l").get<std::vector<int>>();
  code.validate();
  return code;
}

std::uint64_t lee_weight(std::uint32_t x, int d) {
  const std::uint64_t mod = 1ull << d;
  if (x >= mod)
    throw ValidationError("element " + std::to_string(x) + " out of Z_2^" +
                          std::to_string(d));
  // Representative in (-2^{d-1}, 2^{d-1}]; the upper boundary stays positive.
  const std::uint64_t half = mod >> 1;
  return x <= half ? x : mod - x;
}

std::uint64_t lee_weight(std::span<const std::uint32_t> x, int d) {
  std::uint64_t sum = 0;
  for (std::uint32_t e : x) sum += lee_weight(e, d);
  return sum;
}

std::uint64_t lee_distance(std::span<const std::uint32_t> x,
                           std::span<const std::uint32_t> y, int d) {
  if (x.size() != y.size()) throw ValidationError("lee_distance length mismatch");
  check_entries(x, d);
  check_entries(y, d);
  const std::uint32_t mask = static_cast<std::uint32_t>((1ull << d) - 1);
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    sum += lee_weight((x[i] - y[i]) & mask, d);
  return sum;
}

Symbols sub_mod(std::span<const std::uint32_t> a,
                std::span<const std::uint32_t> b, int d) {
  if (a.size() != b.size()) throw ValidationError("sub_mod length mismatch");
  const std::uint32_t mask = static_cast<std::uint32_t>((1ull << d) - 1);
  Symbols out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] - b[i]) & mask;
  return out;
}

Symbols add_mod(std::span<const std::uint32_t> a,
                std::span<const std::uint32_t> b, int d) {
  if (a.size() != b.size()) throw ValidationError("add_mod length mismatch");
  const std::uint32_t mask = static_cast<std::uint32_t>((1ull << d) - 1);
  Symbols out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + b[i]) & mask;
  return out;
}

std::uint32_t nearest_power_of_two(std::uint32_t v) {
  if (v <= 1) return 1;
  std::uint32_t low = 1;
  while ((low << 1) != 0 && (low << 1) <= v) low <<= 1;
  std::uint32_t high = low << 1;
  // Equidistant values take the lower power (finer quantization).
  return (v - low <= high - v) ? low : high;
}

SpcCode derive_scaling(std::span<const double> sigma, double kappa, int d,
                       std::span<const DiscretizeRange> ranges) {
  if (kappa <= 0) throw ValidationError("kappa must be positive");
  if (sigma.empty()) throw ValidationError("need at least one feature");
  if (ranges.size() != sigma.size())
    throw ValidationError("one range per feature required");
  SpcCode code;
  code.n = static_cast<int>(sigma.size());
  code.d = d;
  code.l.resize(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (sigma[i] < 0) throw ValidationError("negative standard deviation");
    std::uint32_t scaled = discretize(sigma[i] * kappa, d, ranges[i]);
    std::uint32_t s = nearest_power_of_two(scaled);
    const std::uint32_t cap = 1u << (d - 1);
    if (s > cap) s = cap;
    int li = 0;
    while ((1u << (li + 1)) <= s) ++li;
    code.l[i] = li;
  }
  if (code.l.back() < 1) code.l.back() = 1;  // room for the parity bit
  code.validate();
  return code;
}

SpcCode derive_scaling(std::span<const double> sigma, double kappa, int d,
                       const DiscretizeRange& range) {
  std::vector<DiscretizeRange> ranges(sigma.size(), range);
  return derive_scaling(sigma, kappa, d, std::span<const DiscretizeRange>(ranges));
}

Codeword sample_codeword(const SpcCode& code, Rng& rng) {
  code.validate();
  Codeword cw;
  cw.symbols.resize(code.n);
  std::uint64_t parity = 0;
  for (int i = 0; i + 1 < code.n; ++i) {
    std::uint64_t u = rng.uniform(1ull << (code.d - code.l[i]));
    parity += u;
    cw.symbols[i] = static_cast<std::uint32_t>(u << code.l[i]);
  }
  // Last symbol: the low bit of c_n / s_n is forced by the parity condition.
  const int free_bits = code.d - code.l[code.n - 1] - 1;
  std::uint64_t w = free_bits > 0 ? rng.uniform(1ull << free_bits) : 0;
  std::uint64_t u_last = (w << 1) | (parity & 1);
  cw.symbols[code.n - 1] = static_cast<std::uint32_t>(u_last << code.l[code.n - 1]);
  return cw;
}

bool is_codeword(std::span<const std::uint32_t> v, const SpcCode& code) {
  if (static_cast<int>(v.size()) != code.n) return false;
  check_entries(v, code.d);
  std::uint64_t scaled_sum = 0;
  for (int i = 0; i < code.n; ++i) {
    const std::uint32_t s = code.scaling(i);
    if (v[i] % s != 0) return false;
    scaled_sum += v[i] / s;
  }
  return scaled_sum % 2 == 0;
}

Codeword decode(std::span<const std::uint32_t> gamma, const SpcCode& code) {
  code.validate();
  if (static_cast<int>(gamma.size()) != code.n)
    throw ValidationError("decode input length != n");
  check_entries(gamma, code.d);

  const std::uint32_t mask = static_cast<std::uint32_t>((1ull << code.d) - 1);
  std::vector<std::int64_t> err(code.n);
  Symbols cw(code.n);
  std::uint64_t scaled_sum = 0;
  for (int i = 0; i < code.n; ++i) {
    const std::int64_t s = code.scaling(i);
    std::int64_t e = gamma[i] % s;
    if (2 * e > s) e -= s;  // strict: residue exactly s/2 stays positive
    err[i] = e;
    cw[i] = static_cast<std::uint32_t>((gamma[i] - e) & mask);
    scaled_sum += cw[i] / static_cast<std::uint32_t>(s);
  }

  if (scaled_sum % 2 == 1) {
    // Repair parity at the symbol with the largest relative error
    // |e_i| / s_i; ties resolve to the lowest index.
    int k = 0;
    for (int i = 1; i < code.n; ++i) {
      const std::int64_t lhs = std::llabs(err[i]) * code.scaling(k);
      const std::int64_t rhs = std::llabs(err[k]) * code.scaling(i);
      if (lhs > rhs) k = i;
    }
    const std::int64_t step = err[k] < 0 ? -static_cast<std::int64_t>(code.scaling(k))
                                         : static_cast<std::int64_t>(code.scaling(k));
    cw[k] = static_cast<std::uint32_t>((cw[k] + step) & mask);
  }
  return Codeword{std::move(cw)};
}

int log2_codeword_count(const SpcCode& code) {
  int bits = 0;
  for (int i = 0; i < code.n; ++i) bits += code.d - code.l[i];
  return bits - 1;
}

std::vector<Codeword> enumerate_codewords(const SpcCode& code) {
  code.validate();
  std::vector<Codeword> out;
  Symbols current(code.n, 0);
  // Iterate over all scaled-value combinations and keep even parities.
  std::vector<std::uint32_t> quotients(code.n, 0);
  while (true) {
    std::uint64_t parity = 0;
    for (int i = 0; i < code.n; ++i) parity += quotients[i];
    if (parity % 2 == 0) {
      for (int i = 0; i < code.n; ++i) current[i] = quotients[i] << code.l[i];
      out.push_back(Codeword{current});
    }
    int pos = 0;
    while (pos < code.n) {
      if (++quotients[pos] < (1u << (code.d - code.l[pos]))) break;
      quotients[pos] = 0;
      ++pos;
    }
    if (pos == code.n) break;
  }
  return out;
}

}  // namespace keyforge
