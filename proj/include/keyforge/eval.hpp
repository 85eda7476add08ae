#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "keyforge/commitment.hpp"
#include "keyforge/features.hpp"
#include "keyforge/he.hpp"
#include "keyforge/synth.hpp"

namespace keyforge {

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct Dataset {
  std::vector<FeatureSpec> spec;
  struct User {
    int id = 0;
    std::vector<KeystrokeEvent> train;  // first session: commitments
    std::vector<KeystrokeEvent> test;   // second session: key retrieval
  };
  std::vector<User> users;
  std::uint64_t seed = 0;
};

/// Reads user###_s1.csv / user###_s2.csv plus manifest.json from dir.
Dataset load_dataset(const std::filesystem::path& dir);

/// Generates the same dataset in memory (no files).
Dataset dataset_from_population(const SyntheticPopulation& pop);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct EvalConfig {
  int d = 8;
  DiscretizeRange range{0.0, 500.0};
  double outlier_threshold_ms = 500.0;
  int slice_minutes = 4;
  int min_samples = 1;
  std::vector<double> kappa_sweep;  // empty -> a default geometric sweep
  double lda_range_sigmas = 4.0;    // half-width of LDA-space ranges, in sds
  std::string key_derivation_input = "keyforge-eval";
  std::uint64_t trial_seed = 1;
};

struct OperatingPoint {
  double kappa = 0.0;
  double far = 0.0;
  double frr = 0.0;
  long genuine_trials = 0;
  long genuine_failures = 0;
  long impostor_trials = 0;
  long impostor_successes = 0;
};

struct EvalReport {
  std::string mode;  // "plain" or "lda"
  int slice_minutes = 0;
  int min_samples = 0;
  std::uint64_t dataset_seed = 0;
  std::vector<OperatingPoint> sweep;
  OperatingPoint eer;
  double availability = 0.0;
  double key_bits = 0.0;     // log2 |C| at the EER operating point
  double entropy_pct = 0.0;  // empirical template entropy fraction at EER
  long usable_slices = 0;
  long skipped_slices = 0;
  int dropped_users = 0;  // training session missing some feature

  nlohmann::json to_json() const;
};

/// Zero-effort attack evaluation on raw (non-LDA) features: every user's
/// testing slices attempt every other user's commitment.
EvalReport run_zero_effort(const Dataset& dataset, const EvalConfig& config);

/// Leave-one-user-out evaluation in LDA space: the held-out impostor attacks
/// every enrolled commitment of their fold; genuine attempts come from the
/// enrolled users. The fold model never sees impostor data.
EvalReport run_crossval_lda(const Dataset& dataset, const EvalConfig& config);

/// The sweep point with the smallest |FAR - FRR|; ties prefer smaller
/// FAR + FRR, then smaller kappa.
OperatingPoint compute_eer(const std::vector<OperatingPoint>& sweep);

struct EntropyReport {
  double key_bits = 0.0;     // log2 of the codeword count
  double entropy_pct = 0.0;  // sum of per-feature template entropies / (n d)
};

/// Empirical Shannon entropy of the discretized templates across users, each
/// feature capped at its retained d - l_i bits. Needs >= 2 templates.
EntropyReport compute_entropy(const SpcCode& code,
                              const std::vector<FeatureVector>& templates);

// ---------------------------------------------------------------------------
// Protocol bench
// ---------------------------------------------------------------------------

struct BenchResult {
  int n = 0;
  long m = 0;  // enrolled users after the measured enrollment
  double user_ms = 0.0, es_ms = 0.0, mp_ms = 0.0;
  std::uint64_t user_es_bytes = 0;  // both directions of the measured enrollment
  std::uint64_t es_mp_bytes = 0;
  he::OpCounters user, es, mp;

  nlohmann::json to_json() const;
};

/// Runs real protocol instances over the (n, m) grid and reports the cost of
/// the m-th enrollment (per-role wall time, wire bytes, operation counts).
std::vector<BenchResult> bench_pplda(const std::vector<int>& feature_counts,
                                     const std::vector<long>& user_counts,
                                     const he::HeParams& params,
                                     std::uint64_t seed);

}  // namespace keyforge
