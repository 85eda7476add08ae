#include "keyforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "keyforge/rng.hpp"

namespace keyforge {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  return x;
}

}  // namespace

void PopulationConfig::validate() const {
  if (users < 1) throw ValidationError("population needs at least one user");
  if (sessions < 1) throw ValidationError("need at least one session");
  if (session_minutes < 1) throw ValidationError("session must be >= 1 minute");
  if (keyhold_mean_hi < keyhold_mean_lo || digraph_mean_hi < digraph_mean_lo ||
      within_sd_hi < within_sd_lo)
    throw ValidationError("inverted hyper-distribution range");
  if (within_sd_lo <= 0) throw ValidationError("within-user sd must be positive");
  if (tempo_sd < 0) throw ValidationError("tempo_sd must be >= 0");
  if (tempo_block_seconds < 1) throw ValidationError("tempo block must be >= 1 s");
  if (digraph_burst_prob < 0 || digraph_burst_prob > 1)
    throw ValidationError("digraph_burst_prob must be a probability");
}

SyntheticPopulation plan_population(const PopulationConfig& config,
                                    std::uint64_t seed) {
  config.validate();
  SyntheticPopulation pop;
  pop.config = config;
  pop.seed = seed;
  pop.spec = default_full_spec();

  Rng rng(mix(seed, 0x706f70756c617465ULL));
  for (int u = 0; u < config.users; ++u) {
    UserGenerativeParams params;
    for (const auto& f : pop.spec) {
      const bool keyhold = f.kind == FeatureKind::Keyhold;
      const double lo = keyhold ? config.keyhold_mean_lo : config.digraph_mean_lo;
      const double hi = keyhold ? config.keyhold_mean_hi : config.digraph_mean_hi;
      params.mean.push_back(rng.uniform_real(lo, hi));
      params.sd.push_back(rng.uniform_real(config.within_sd_lo, config.within_sd_hi));
      params.loading.push_back(
          rng.uniform_real(config.tempo_loading_lo, config.tempo_loading_hi));
    }
    pop.users.push_back(std::move(params));
  }
  return pop;
}

std::vector<KeystrokeEvent> generate_session(const SyntheticPopulation& pop,
                                             int user, int session) {
  if (user < 0 || user >= static_cast<int>(pop.users.size()))
    throw ValidationError("no such user");
  const PopulationConfig& cfg = pop.config;
  const UserGenerativeParams& params = pop.users[static_cast<std::size_t>(user)];
  Rng rng(mix(pop.seed, mix(static_cast<std::uint64_t>(user) + 1,
                            static_cast<std::uint64_t>(session) + 101)));

  // Feature bookkeeping.
  std::vector<std::size_t> keyhold_idx, digraph_idx;
  std::map<std::string, std::size_t> keyhold_by_label;
  std::set<std::string> digraph_labels;
  for (std::size_t i = 0; i < pop.spec.size(); ++i) {
    if (pop.spec[i].kind == FeatureKind::Keyhold) {
      keyhold_idx.push_back(i);
      keyhold_by_label[pop.spec[i].label] = i;
    } else {
      digraph_idx.push_back(i);
      digraph_labels.insert(pop.spec[i].label);
    }
  }

  const std::int64_t session_ms = static_cast<std::int64_t>(cfg.session_minutes) * 60'000;
  const std::int64_t block_ms = static_cast<std::int64_t>(cfg.tempo_block_seconds) * 1000;

  // Piecewise-constant tempo factor, one value per time block.
  std::vector<double> tempo(static_cast<std::size_t>(session_ms / block_ms + 2), 0.0);
  if (cfg.tempo_sd > 0)
    for (double& z : tempo) z = rng.gaussian(0.0, cfg.tempo_sd);

  auto latency = [&](std::size_t feature, std::int64_t at_ms) {
    const double z = tempo[static_cast<std::size_t>(at_ms / block_ms)];
    const double v = params.mean[feature] + params.loading[feature] * z +
                     rng.gaussian(0.0, params.sd[feature]);
    return std::max(1.0, v);  // physical latencies stay positive
  };

  std::vector<KeystrokeEvent> events;
  std::string prev_last_key;  // last pressed key of the previous burst
  double t = 50.0;

  auto hold_feature = [&](const std::string& key) {
    auto it = keyhold_by_label.find(key);
    return it == keyhold_by_label.end() ? keyhold_idx.front() : it->second;
  };

  while (t < static_cast<double>(session_ms)) {
    // Pick the next burst so no accidental cross-burst press pair forms a
    // tracked digraph (that latency is pacing, not a drawn feature value).
    bool is_pair = !digraph_idx.empty() &&
                   rng.uniform_real(0.0, 1.0) < cfg.digraph_burst_prob;
    std::string first_key, second_key;
    std::size_t pair_feature = 0;
    for (int attempt = 0; attempt < 64; ++attempt) {
      if (is_pair) {
        pair_feature = digraph_idx[rng.uniform(digraph_idx.size())];
        const std::string& label = pop.spec[pair_feature].label;
        first_key = label.substr(0, 1);
        second_key = label.substr(1, 1);
      } else {
        first_key = pop.spec[keyhold_idx[rng.uniform(keyhold_idx.size())]].label;
        second_key.clear();
      }
      if (prev_last_key.empty() || prev_last_key.size() != 1 ||
          first_key.size() != 1 ||
          !digraph_labels.count(prev_last_key + first_key))
        break;
    }

    const std::int64_t t0 = static_cast<std::int64_t>(std::llround(t));
    const double hold1 = latency(hold_feature(first_key), t0);
    events.push_back({t0, first_key, KeyAction::Press});
    events.push_back({t0 + static_cast<std::int64_t>(std::llround(hold1)), first_key,
                      KeyAction::Release});
    std::string last = first_key;
    double last_press = static_cast<double>(t0);

    if (is_pair) {
      const double dg = latency(pair_feature, t0);
      const std::int64_t t1 = t0 + static_cast<std::int64_t>(std::llround(dg));
      const double hold2 = latency(hold_feature(second_key), t1);
      events.push_back({t1, second_key, KeyAction::Press});
      events.push_back({t1 + static_cast<std::int64_t>(std::llround(hold2)),
                        second_key, KeyAction::Release});
      last = second_key;
      last_press = static_cast<double>(t1);
    }

    prev_last_key = last;
    const double gap = std::max(40.0, rng.gaussian(cfg.burst_gap_mean, cfg.burst_gap_sd));
    t = last_press + gap;
  }

  std::stable_sort(events.begin(), events.end(),
                   [](const KeystrokeEvent& a, const KeystrokeEvent& b) {
                     return a.timestamp_ms < b.timestamp_ms;
                   });
  return events;
}

std::string render_session_csv(const std::vector<KeystrokeEvent>& events) {
  std::ostringstream out;
  out << "# timestamp_ms,key,action\n";
  for (const auto& ev : events)
    out << ev.timestamp_ms << ',' << ev.key << ','
        << (ev.action == KeyAction::Press ? "down" : "up") << '\n';
  return out.str();
}

nlohmann::json population_manifest(const SyntheticPopulation& pop) {
  std::vector<std::string> labels;
  for (const auto& f : pop.spec)
    labels.push_back((f.kind == FeatureKind::Keyhold ? "K:" : "D:") + f.label);
  return nlohmann::json{{"seed", pop.seed},
                        {"users", pop.config.users},
                        {"sessions", pop.config.sessions},
                        {"session_minutes", pop.config.session_minutes},
                        {"tempo_sd", pop.config.tempo_sd},
                        {"features", labels}};
}

void write_population(const SyntheticPopulation& pop,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (int u = 0; u < pop.config.users; ++u) {
    for (int s = 0; s < pop.config.sessions; ++s) {
      std::ostringstream name;
      name << "user" << std::setw(3) << std::setfill('0') << u << "_s" << (s + 1)
           << ".csv";
      std::ofstream out(dir / name.str(), std::ios::binary);
      if (!out) throw Error("cannot write " + (dir / name.str()).string());
      out << render_session_csv(generate_session(pop, u, s));
    }
  }
  std::ofstream manifest(dir / "manifest.json", std::ios::binary);
  if (!manifest) throw Error("cannot write manifest.json");
  manifest << population_manifest(pop).dump(2) << '\n';
}

}  // namespace keyforge
