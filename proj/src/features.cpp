#include "keyforge/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace keyforge {

namespace {

const char* kKeyholdKeys[] = {"Spacebar", "E", "O", "I", "A", "S", "H", "N",
                              "R",        "T", "L", "D", "U", "Y", "W", "G",
                              "P",        "C", "M", "B", "F", "V", "K"};

const char* kDigraphPairs[] = {"HE", "IN", "TH", "ER", "AN",
                               "RE", "EN", "ND", "HA"};

std::string normalize_key(std::string key) {
  if (key.size() == 1) {
    key[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(key[0])));
    return key;
  }
  // Accept "Space"/"space"/"SPACEBAR" variants, map to the canonical label.
  std::string upper = key;
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "SPACEBAR" || upper == "SPACE") return "Spacebar";
  return key;
}

}  // namespace

const std::vector<FeatureSpec>& default_keyhold_spec() {
  static const std::vector<FeatureSpec> spec = [] {
    std::vector<FeatureSpec> s;
    for (const char* k : kKeyholdKeys) s.push_back({FeatureKind::Keyhold, k});
    return s;
  }();
  return spec;
}

const std::vector<FeatureSpec>& default_digraph_spec() {
  static const std::vector<FeatureSpec> spec = [] {
    std::vector<FeatureSpec> s;
    for (const char* p : kDigraphPairs) s.push_back({FeatureKind::Digraph, p});
    return s;
  }();
  return spec;
}

const std::vector<FeatureSpec>& default_full_spec() {
  static const std::vector<FeatureSpec> spec = [] {
    std::vector<FeatureSpec> s = default_keyhold_spec();
    const auto& dg = default_digraph_spec();
    s.insert(s.end(), dg.begin(), dg.end());
    return s;
  }();
  return spec;
}

void validate_feature_spec(const std::vector<FeatureSpec>& spec) {
  std::set<std::pair<int, std::string>> seen;
  for (const auto& f : spec) {
    if (f.kind == FeatureKind::Keyhold) {
      if (f.label != "Spacebar" && f.label.size() != 1)
        throw ValidationError("bad keyhold label: " + f.label);
    } else {
      if (f.label.size() != 2)
        throw ValidationError("digraph label must be two keys: " + f.label);
    }
    if (!seen.insert({static_cast<int>(f.kind), f.label}).second)
      throw ValidationError("duplicate feature: " + f.label);
  }
}

std::vector<FeatureSpec> parse_feature_spec(std::string_view text) {
  std::vector<FeatureSpec> spec;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::string label = normalize_key(line);
    if (label == "Spacebar" || label.size() == 1) {
      spec.push_back({FeatureKind::Keyhold, label});
    } else if (label.size() == 2) {
      for (char& c : label) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      spec.push_back({FeatureKind::Digraph, label});
    } else {
      throw ParseError("unrecognized feature label: " + line, line_no);
    }
  }
  validate_feature_spec(spec);
  return spec;
}

ParsedLog parse_keystroke_log(std::string_view raw_text) {
  ParsedLog log;
  std::size_t line_no = 0;
  std::istringstream in{std::string(raw_text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;

    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw ParseError("expected `timestamp,key,action`: " + line, line_no);

    std::string ts_str = line.substr(0, c1);
    std::string key = line.substr(c1 + 1, c2 - c1 - 1);
    std::string action = line.substr(c2 + 1);

    std::int64_t ts = 0;
    try {
      std::size_t pos = 0;
      ts = std::stoll(ts_str, &pos);
      if (pos != ts_str.size()) throw std::invalid_argument(ts_str);
    } catch (const std::exception&) {
      throw ParseError("bad timestamp: " + ts_str, line_no);
    }
    if (ts < 0) throw ValidationError("negative timestamp at line " + std::to_string(line_no));
    if (key.empty()) throw ParseError("empty key", line_no);

    KeystrokeEvent ev;
    ev.timestamp_ms = ts;
    ev.key = normalize_key(key);
    if (action == "down")
      ev.action = KeyAction::Press;
    else if (action == "up")
      ev.action = KeyAction::Release;
    else
      throw ParseError("action must be `down` or `up`, got: " + action, line_no);
    log.events.push_back(std::move(ev));
  }

  std::stable_sort(log.events.begin(), log.events.end(),
                   [](const KeystrokeEvent& a, const KeystrokeEvent& b) {
                     return a.timestamp_ms < b.timestamp_ms;
                   });

  // Press/release matching for diagnostics only; events are kept either way.
  std::map<std::string, int> open_presses;
  for (const auto& ev : log.events) {
    if (ev.action == KeyAction::Press) {
      ++open_presses[ev.key];
    } else {
      auto it = open_presses.find(ev.key);
      if (it == open_presses.end() || it->second == 0) {
        log.diagnostics.push_back("orphan release of " + ev.key + " at " +
                                  std::to_string(ev.timestamp_ms) + " ms");
      } else {
        --it->second;
      }
    }
  }
  for (const auto& [key, count] : open_presses)
    for (int i = 0; i < count; ++i)
      log.diagnostics.push_back("unmatched press of " + key);
  return log;
}

RawSample extract_features(const std::vector<KeystrokeEvent>& events,
                           const std::vector<FeatureSpec>& spec,
                           TimeWindow window) {
  RawSample sample;
  sample.latencies.resize(spec.size());

  // Index features by label for O(1) lookup.
  std::map<std::string, std::size_t> keyhold_idx;
  std::map<std::string, std::size_t> digraph_idx;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec[i].kind == FeatureKind::Keyhold)
      keyhold_idx[spec[i].label] = i;
    else
      digraph_idx[spec[i].label] = i;
  }

  std::map<std::string, std::int64_t> open_press;  // key -> press time
  std::optional<std::pair<std::string, std::int64_t>> last_press;

  for (const auto& ev : events) {
    if (ev.timestamp_ms < window.begin_ms || ev.timestamp_ms >= window.end_ms) continue;
    if (ev.action == KeyAction::Press) {
      if (last_press) {
        std::string pair = last_press->first + ev.key;
        auto it = digraph_idx.find(pair);
        if (it != digraph_idx.end())
          sample.latencies[it->second].push_back(
              static_cast<double>(ev.timestamp_ms - last_press->second));
      }
      last_press = {ev.key, ev.timestamp_ms};
      open_press[ev.key] = ev.timestamp_ms;  // later press wins
    } else {
      auto op = open_press.find(ev.key);
      if (op != open_press.end()) {
        auto it = keyhold_idx.find(ev.key);
        if (it != keyhold_idx.end())
          sample.latencies[it->second].push_back(
              static_cast<double>(ev.timestamp_ms - op->second));
        open_press.erase(op);
      }
    }
  }
  return sample;
}

RawSample clean_outliers(const RawSample& sample, double threshold_ms) {
  if (threshold_ms <= 0) throw ValidationError("outlier threshold must be positive");
  RawSample out;
  out.latencies.resize(sample.latencies.size());
  for (std::size_t i = 0; i < sample.latencies.size(); ++i)
    for (double v : sample.latencies[i])
      if (v <= threshold_ms) out.latencies[i].push_back(v);
  return out;
}

std::uint32_t discretize(double x, int d, const DiscretizeRange& range) {
  if (d < 1 || d > 24) throw ValidationError("bit width d must be in [1, 24]");
  if (range.max_value <= range.min_value)
    throw ValidationError("discretize range requires max > min");
  const std::uint32_t top = (1u << d) - 1;
  if (x >= range.max_value) return top;
  if (x <= range.min_value) return 0;
  double cell = static_cast<double>(top) * (x - range.min_value) /
                (range.max_value - range.min_value);
  std::uint32_t v = static_cast<std::uint32_t>(std::floor(cell));
  return v > top ? top : v;
}

Template build_template(const std::vector<RawSample>& samples,
                        const std::vector<FeatureSpec>& spec, int d,
                        const DiscretizeRange& range) {
  const std::size_t n = spec.size();
  Template t;
  t.mean.d = d;
  t.mean.values.resize(n);
  t.variance.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0, sum_sq = 0;
    std::size_t count = 0;
    for (const auto& s : samples) {
      if (i >= s.latencies.size()) continue;
      for (double v : s.latencies[i]) {
        double q = static_cast<double>(discretize(v, d, range));
        sum += q;
        sum_sq += q * q;
        ++count;
      }
    }
    if (count == 0) throw AvailabilityError(spec[i].label);
    double mean = sum / static_cast<double>(count);
    double var = sum_sq / static_cast<double>(count) - mean * mean;
    if (var < 0) var = 0;  // guard rounding
    t.mean.values[i] = static_cast<std::uint32_t>(std::floor(mean + 0.5));
    t.variance[i] = var;
  }
  return t;
}

double availability(const std::vector<KeystrokeEvent>& events,
                    const std::vector<FeatureSpec>& spec,
                    int slice_length_min, int min_samples) {
  if (slice_length_min <= 0) throw ValidationError("slice length must be positive");
  if (min_samples < 1) throw ValidationError("min_samples must be >= 1");
  if (events.empty()) return 0.0;

  const std::int64_t slice_ms = static_cast<std::int64_t>(slice_length_min) * 60'000;
  const std::int64_t span_end = events.back().timestamp_ms + 1;
  const std::int64_t slice_count = (span_end + slice_ms - 1) / slice_ms;

  std::int64_t complete = 0;
  for (std::int64_t k = 0; k < slice_count; ++k) {
    TimeWindow w{k * slice_ms, (k + 1) * slice_ms};
    RawSample s = extract_features(events, spec, w);
    bool ok = true;
    for (const auto& lat : s.latencies) {
      if (lat.size() < static_cast<std::size_t>(min_samples)) {
        ok = false;
        break;
      }
    }
    if (ok) ++complete;
  }
  return static_cast<double>(complete) / static_cast<double>(slice_count);
}

}  // namespace keyforge
