#include <doctest.h>

#include <filesystem>

#include <nlohmann/json.hpp>

#include "keyforge/eval.hpp"

using namespace keyforge;

namespace {

OperatingPoint pt(double kappa, double far, double frr) {
  OperatingPoint p;
  p.kappa = kappa;
  p.far = far;
  p.frr = frr;
  return p;
}

// Small, fast population with well-separated users.
SyntheticPopulation separated_population(int users, std::uint64_t seed,
                                         int minutes = 24) {
  PopulationConfig config;
  config.users = users;
  config.session_minutes = minutes;
  config.within_sd_lo = 6;
  config.within_sd_hi = 10;
  SyntheticPopulation pop = plan_population(config, seed);
  // Spread the users far apart: distinct mean plateaus per user.
  for (int u = 0; u < users; ++u)
    for (std::size_t f = 0; f < pop.spec.size(); ++f)
      pop.users[static_cast<std::size_t>(u)].mean[f] =
          60.0 + 55.0 * u + 3.0 * static_cast<double>(f % 5);
  return pop;
}

}  // namespace

TEST_CASE("compute_eer picks the minimum-distance point") {
  SUBCASE("exact crossing wins") {
    const auto best = compute_eer({pt(1, 0.3, 0.1), pt(2, 0.2, 0.2), pt(3, 0.1, 0.4)});
    CHECK(best.kappa == 2);
  }
  SUBCASE("documented three-point example") {
    const auto best = compute_eer({pt(1, 0.10, 0.02), pt(2, 0.06, 0.05), pt(3, 0.02, 0.12)});
    CHECK(best.kappa == 2);
  }
  SUBCASE("single point") {
    CHECK(compute_eer({pt(5, 0.4, 0.0)}).kappa == 5);
  }
  SUBCASE("tie prefers smaller FAR + FRR, then smaller kappa") {
    const auto best = compute_eer({pt(1, 0.30, 0.30), pt(2, 0.10, 0.10)});
    CHECK(best.kappa == 2);
    const auto tie = compute_eer({pt(3, 0.10, 0.10), pt(2, 0.10, 0.10)});
    CHECK(tie.kappa == 2);
  }
  CHECK_THROWS_AS(compute_eer({}), ValidationError);
}

TEST_CASE("compute_entropy spans the degenerate and maximal cases") {
  SpcCode code;
  code.n = 2;
  code.d = 2;
  code.l = {0, 0};  // measurement profile; not a committable code

  SUBCASE("uniform templates over the full range reach 100%") {
    std::vector<FeatureVector> templates;
    for (std::uint32_t a = 0; a < 4; ++a)
      for (std::uint32_t b = 0; b < 4; ++b) {
        FeatureVector t;
        t.d = 2;
        t.values = {a, b};
        templates.push_back(t);
      }
    const EntropyReport r = compute_entropy(code, templates);
    CHECK(r.entropy_pct == doctest::Approx(1.0));
    CHECK(r.key_bits == doctest::Approx(3.0));  // 2+2 free bits minus parity
  }
  SUBCASE("identical templates carry no entropy") {
    FeatureVector t;
    t.d = 2;
    t.values = {3, 1};
    const EntropyReport r = compute_entropy(code, {t, t, t, t});
    CHECK(r.entropy_pct == doctest::Approx(0.0));
  }
  SUBCASE("hand-computed four-user two-feature case") {
    // Feature 0 values {0,0,1,2}: H = 2*(1/2) + 2*(1/4*2) = 1.5 bits.
    // Feature 1 values {0,1,0,1}: H = 1 bit.
    std::vector<FeatureVector> templates;
    const std::uint32_t f0[] = {0, 0, 1, 2}, f1[] = {0, 1, 0, 1};
    for (int i = 0; i < 4; ++i) {
      FeatureVector t;
      t.d = 2;
      t.values = {f0[i], f1[i]};
      templates.push_back(t);
    }
    const EntropyReport r = compute_entropy(code, templates);
    CHECK(r.entropy_pct == doctest::Approx((1.5 + 1.0) / 4.0));
  }
  SUBCASE("caps apply per retained bits") {
    SpcCode coarse = code;
    coarse.l = {1, 1};  // only d - l = 1 bit retained per feature
    std::vector<FeatureVector> templates;
    for (std::uint32_t a = 0; a < 4; ++a) {
      FeatureVector t;
      t.d = 2;
      t.values = {a, 3 - a};
      templates.push_back(t);
    }
    const EntropyReport r = compute_entropy(coarse, templates);
    CHECK(r.entropy_pct == doctest::Approx(0.5));  // capped at 1 bit each
  }
  SUBCASE("a single template is degenerate") {
    FeatureVector t;
    t.d = 2;
    t.values = {0, 0};
    CHECK_THROWS_AS(compute_entropy(code, {t}), ValidationError);
  }
}

TEST_CASE("zero-effort report on a separated population") {
  const auto pop = separated_population(3, 21);
  const Dataset dataset = dataset_from_population(pop);
  EvalConfig config;
  config.kappa_sweep = {1.0, 2.0, 4.0};

  const EvalReport report = run_zero_effort(dataset, config);
  CHECK(report.mode == "plain");
  REQUIRE(report.sweep.size() == 3);
  for (const auto& point : report.sweep) {
    CHECK(point.far >= 0.0);
    CHECK(point.far <= 1.0);
    CHECK(point.frr >= 0.0);
    CHECK(point.frr <= 1.0);
    CHECK(point.genuine_trials > 0);
    CHECK(point.impostor_trials > 0);
  }
  // Far-separated users with tiny spread: perfect separation at moderate kappa.
  const auto& mid = report.sweep[1];
  CHECK(mid.far == 0.0);
  CHECK(mid.frr == 0.0);

  // Determinism: the report reproduces bit-for-bit from (seed, config).
  const EvalReport again = run_zero_effort(dataset, config);
  CHECK(report.to_json().dump() == again.to_json().dump());
}

TEST_CASE("identical-parameter users sit near the FAR/FRR symmetry line") {
  PopulationConfig config;
  config.users = 2;
  config.session_minutes = 32;
  config.within_sd_lo = 10;
  config.within_sd_hi = 14;
  SyntheticPopulation pop = plan_population(config, 33);
  pop.users[1] = pop.users[0];  // indistinguishable users

  EvalConfig eval_config;
  eval_config.kappa_sweep = {2.0, 3.0, 4.0, 6.0};
  const EvalReport report = run_zero_effort(dataset_from_population(pop), eval_config);
  // Exchangeable genuine/impostor trials: success rates match, so
  // FAR ~ 1 - FRR pointwise up to sampling noise.
  for (const auto& point : report.sweep)
    CHECK(std::abs(point.far - (1.0 - point.frr)) < 0.3);
}

TEST_CASE("cross-validated LDA evaluation runs and excludes the impostor") {
  PopulationConfig config;
  config.users = 6;
  config.session_minutes = 24;
  config.tempo_sd = 25.0;
  const Dataset dataset = dataset_from_population(plan_population(config, 55));
  EvalConfig eval_config;
  eval_config.kappa_sweep = {2.0, 4.0, 8.0};

  const EvalReport report = run_crossval_lda(dataset, eval_config);
  CHECK(report.mode == "lda");
  REQUIRE(report.sweep.size() == 3);
  for (const auto& point : report.sweep) {
    CHECK(point.genuine_trials > 0);
    CHECK(point.impostor_trials > 0);
  }
  CHECK(report.key_bits > 0);
}

TEST_CASE("dataset files round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "keyforge_eval_ds";
  std::filesystem::remove_all(dir);
  const auto pop = separated_population(3, 77, 4);
  write_population(pop, dir);

  const Dataset from_disk = load_dataset(dir);
  const Dataset in_memory = dataset_from_population(pop);
  REQUIRE(from_disk.users.size() == in_memory.users.size());
  CHECK(from_disk.seed == pop.seed);
  for (std::size_t u = 0; u < from_disk.users.size(); ++u) {
    CHECK(from_disk.users[u].train == in_memory.users[u].train);
    CHECK(from_disk.users[u].test == in_memory.users[u].test);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("bench produces positive counts and m-independent ES-MP bytes") {
  he::HeParams params;
  params.modulus_bits = 256;
  params.plaintext_bits = 48;
  const auto results = bench_pplda({2}, {2, 3}, params, 3);
  REQUIRE(results.size() == 2);
  CHECK(results[0].user.encrypt == 2 * 4 + 2 * 2);
  CHECK(results[0].mp.decrypt == 2 * 4 + 2);
  CHECK(results[0].es.decrypt == 0);
  CHECK(results[0].es_mp_bytes == results[1].es_mp_bytes);
  CHECK(results[1].user_es_bytes > results[0].user_es_bytes);
}
