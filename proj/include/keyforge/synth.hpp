#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "keyforge/features.hpp"

namespace keyforge {

// Generative model for one population: per-user Gaussian latencies per
// feature, with an optional slowly-varying shared "tempo" factor that makes
// features correlate within a user (the controllable cause behind LDA's
// advantage). Stands in for a human dataset.
struct PopulationConfig {
  int users = 10;
  int sessions = 2;
  int session_minutes = 45;

  // Per-user feature means are drawn uniformly from these ranges (ms).
  double keyhold_mean_lo = 70.0, keyhold_mean_hi = 150.0;
  double digraph_mean_lo = 120.0, digraph_mean_hi = 280.0;
  // Per-user within-session standard deviation range (ms).
  double within_sd_lo = 8.0, within_sd_hi = 22.0;

  // Shared tempo factor: piecewise-constant N(0, tempo_sd) per block,
  // entering each latency through a per-feature loading. Zero disables it.
  double tempo_sd = 0.0;
  int tempo_block_seconds = 30;
  double tempo_loading_lo = 0.6, tempo_loading_hi = 1.4;

  // Burst pacing.
  double burst_gap_mean = 280.0, burst_gap_sd = 70.0;
  double digraph_burst_prob = 0.55;

  void validate() const;
};

struct UserGenerativeParams {
  std::vector<double> mean;     // per feature, ms
  std::vector<double> sd;       // per feature, ms
  std::vector<double> loading;  // tempo loading per feature
};

struct SyntheticPopulation {
  PopulationConfig config;
  std::uint64_t seed = 0;
  std::vector<FeatureSpec> spec;  // keyhold features first, then digraphs
  std::vector<UserGenerativeParams> users;
};

/// Draws per-user generative parameters. Deterministic in the seed.
SyntheticPopulation plan_population(const PopulationConfig& config,
                                    std::uint64_t seed);

/// Emits one session's keystroke events (sorted, ms timestamps).
std::vector<KeystrokeEvent> generate_session(const SyntheticPopulation& pop,
                                             int user, int session);

/// Renders a session in the external CSV log format.
std::string render_session_csv(const std::vector<KeystrokeEvent>& events);

/// Writes user###_s#.csv files plus manifest.json into dir.
void write_population(const SyntheticPopulation& pop,
                      const std::filesystem::path& dir);

nlohmann::json population_manifest(const SyntheticPopulation& pop);

}  // namespace keyforge
