#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "keyforge/features.hpp"
#include "keyforge/synth.hpp"

using namespace keyforge;

namespace {

PopulationConfig small_config() {
  PopulationConfig config;
  config.users = 3;
  config.session_minutes = 8;
  return config;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  const auto pop1 = plan_population(small_config(), 42);
  const auto pop2 = plan_population(small_config(), 42);
  const auto pop3 = plan_population(small_config(), 43);
  CHECK(render_session_csv(generate_session(pop1, 0, 0)) ==
        render_session_csv(generate_session(pop2, 0, 0)));
  CHECK(render_session_csv(generate_session(pop1, 0, 0)) !=
        render_session_csv(generate_session(pop3, 0, 0)));
  CHECK(pop1.users[1].mean == pop2.users[1].mean);
}

TEST_CASE("write_population emits two files per user plus a manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "keyforge_synth_test";
  std::filesystem::remove_all(dir);
  auto config = small_config();
  config.users = 10;
  config.session_minutes = 2;
  write_population(plan_population(config, 7), dir);

  int csv_files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".csv") ++csv_files;
  CHECK(csv_files == 20);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("generated logs are valid and ordered") {
  const auto pop = plan_population(small_config(), 11);
  const auto events = generate_session(pop, 1, 0);
  REQUIRE(!events.empty());
  for (std::size_t i = 1; i < events.size(); ++i)
    CHECK(events[i - 1].timestamp_ms <= events[i].timestamp_ms);

  // The CSV round-trips through the parser with no orphan events.
  const ParsedLog parsed = parse_keystroke_log(render_session_csv(events));
  CHECK(parsed.events.size() == events.size());
  CHECK(parsed.diagnostics.empty());
}

TEST_CASE("realized feature means track the configured generators") {
  PopulationConfig config;
  config.users = 2;
  config.session_minutes = 40;
  config.tempo_sd = 0.0;  // isolate the per-feature Gaussians
  const auto pop = plan_population(config, 5);
  const auto events = generate_session(pop, 0, 0);

  const RawSample sample = extract_features(
      events, pop.spec, {0, std::numeric_limits<std::int64_t>::max()});
  int checked = 0;
  for (std::size_t i = 0; i < pop.spec.size(); ++i) {
    const auto& lat = sample.latencies[i];
    if (lat.size() < 30) continue;
    double sum = 0;
    for (double v : lat) sum += v;
    const double mean = sum / static_cast<double>(lat.size());
    const double bound = 3.0 * pop.users[0].sd[i] / std::sqrt(static_cast<double>(lat.size())) +
                         1.0;  // ms rounding slack
    CHECK(std::abs(mean - pop.users[0].mean[i]) < bound);
    ++checked;
  }
  CHECK(checked > 20);  // most features observed often enough to test
}

TEST_CASE("tempo factor induces cross-feature correlation") {
  PopulationConfig config;
  config.users = 1;
  config.session_minutes = 60;
  config.tempo_sd = 40.0;
  const auto pop = plan_population(config, 9);
  const auto events = generate_session(pop, 0, 0);

  // Average two keyhold features per minute block and correlate the blocks.
  const std::vector<FeatureSpec> two = {pop.spec[1], pop.spec[2]};
  std::vector<double> a, b;
  for (int minute = 0; minute < 60; ++minute) {
    const RawSample s = extract_features(
        events, two, {minute * 60'000LL, (minute + 1) * 60'000LL});
    if (s.latencies[0].empty() || s.latencies[1].empty()) continue;
    auto mean = [](const std::vector<double>& v) {
      double sum = 0;
      for (double x : v) sum += x;
      return sum / static_cast<double>(v.size());
    };
    a.push_back(mean(s.latencies[0]));
    b.push_back(mean(s.latencies[1]));
  }
  REQUIRE(a.size() > 30);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  const double corr = cov / std::sqrt(va * vb);
  CHECK(corr > 0.3);  // shared tempo shows up across features
}
