#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "keyforge/errors.hpp"

namespace keyforge {

// ---------------------------------------------------------------------------
// Keystroke events and feature specs
// ---------------------------------------------------------------------------

enum class KeyAction { Press, Release };

struct KeystrokeEvent {
  std::int64_t timestamp_ms = 0;  // milliseconds since session start
  std::string key;                // "A".."Z" or "Spacebar"
  KeyAction action = KeyAction::Press;

  friend bool operator==(const KeystrokeEvent&, const KeystrokeEvent&) = default;
};

struct ParsedLog {
  std::vector<KeystrokeEvent> events;       // ordered by timestamp
  std::vector<std::string> diagnostics;     // orphan releases / unmatched presses
};

enum class FeatureKind { Keyhold, Digraph };

// One measured feature: how long a key is held, or the press-to-press latency
// of a consecutive key pair.
struct FeatureSpec {
  FeatureKind kind = FeatureKind::Keyhold;
  std::string label;  // single key for keyhold, two keys for digraph ("TH")

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

/// The 23 most-available keyhold keys.
const std::vector<FeatureSpec>& default_keyhold_spec();
/// The 9 most-available digraph pairs.
const std::vector<FeatureSpec>& default_digraph_spec();
/// Keyhold + digraph, in that order (32 features).
const std::vector<FeatureSpec>& default_full_spec();

/// Parses a newline-separated spec file: single characters or "Spacebar"
/// are keyholds, two-character labels are digraphs. Duplicates are rejected.
std::vector<FeatureSpec> parse_feature_spec(std::string_view text);

void validate_feature_spec(const std::vector<FeatureSpec>& spec);

// ---------------------------------------------------------------------------
// Samples and discretized vectors
// ---------------------------------------------------------------------------

// Per-feature latency observations in milliseconds; entry i corresponds to
// spec[i]. Individual lists may be empty.
struct RawSample {
  std::vector<std::vector<double>> latencies;

  std::size_t feature_count() const { return latencies.size(); }
};

// Discretized biometric vector: n values, each in [0, 2^d).
struct FeatureVector {
  std::vector<std::uint32_t> values;
  int d = 8;

  std::size_t size() const { return values.size(); }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct DiscretizeRange {
  double min_value = 0.0;
  double max_value = 500.0;
};

struct TimeWindow {
  std::int64_t begin_ms = 0;  // inclusive
  std::int64_t end_ms = 0;    // exclusive
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Parses the CSV log format `timestamp_ms,key,action` (action: down|up).
/// Lines starting with '#' are ignored. Throws ParseError with the offending
/// line number on malformed input, ValidationError on negative timestamps.
ParsedLog parse_keystroke_log(std::string_view raw_text);

/// Extracts per-feature latencies from the events inside [window.begin_ms,
/// window.end_ms). Keyhold = release - press of the same key instance;
/// digraph = press-to-press of consecutive presses forming the pair.
RawSample extract_features(const std::vector<KeystrokeEvent>& events,
                           const std::vector<FeatureSpec>& spec,
                           TimeWindow window);

/// Drops every latency strictly greater than threshold_ms.
RawSample clean_outliers(const RawSample& sample, double threshold_ms);

/// floor((2^d - 1)(x - min)/(max - min)), clamped to [0, 2^d - 1] when x
/// falls outside the range. Requires max > min and 1 <= d <= 24.
std::uint32_t discretize(double x, int d, const DiscretizeRange& range);

struct Template {
  FeatureVector mean;            // per-feature mean, rounded half-up
  std::vector<double> variance;  // population variance of discretized values
};

/// Pools the samples, discretizes every observation and returns the
/// per-feature mean (rounded to the integer grid) and population variance.
/// Throws AvailabilityError naming the first feature with no observations.
Template build_template(const std::vector<RawSample>& samples,
                        const std::vector<FeatureSpec>& spec, int d,
                        const DiscretizeRange& range);

/// Fraction of non-overlapping slice_length_min windows (covering [0, last
/// event]) in which every feature has at least min_samples observations.
/// Returns 0 for an empty session.
double availability(const std::vector<KeystrokeEvent>& events,
                    const std::vector<FeatureSpec>& spec,
                    int slice_length_min, int min_samples);

}  // namespace keyforge
