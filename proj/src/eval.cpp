#include "keyforge/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "keyforge/lda.hpp"
#include "keyforge/protocol.hpp"
#include "keyforge/wire.hpp"

namespace keyforge {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  return x;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> default_sweep() {
  return {0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0};
}

// Per-user data after extraction, cleaning and discretization.
struct PreparedUser {
  int id = 0;
  Template tmpl;                            // whole training session
  std::vector<FeatureVector> train_slices;  // usable training slices
  std::vector<FeatureVector> test_slices;   // usable testing slices
  long skipped_test_slices = 0;
  double avail = 0.0;
};

std::optional<FeatureVector> slice_vector(
    const std::vector<KeystrokeEvent>& events,
    const std::vector<FeatureSpec>& spec, TimeWindow window,
    const EvalConfig& cfg) {
  RawSample sample =
      clean_outliers(extract_features(events, spec, window), cfg.outlier_threshold_ms);
  for (const auto& lat : sample.latencies)
    if (lat.size() < static_cast<std::size_t>(cfg.min_samples)) return std::nullopt;
  return build_template({sample}, spec, cfg.d, cfg.range).mean;
}

std::vector<FeatureVector> slice_vectors(const std::vector<KeystrokeEvent>& events,
                                         const std::vector<FeatureSpec>& spec,
                                         const EvalConfig& cfg, long* skipped) {
  std::vector<FeatureVector> out;
  if (events.empty()) return out;
  const std::int64_t slice_ms =
      static_cast<std::int64_t>(cfg.slice_minutes) * 60'000;
  const std::int64_t span_end = events.back().timestamp_ms + 1;
  const std::int64_t slices = (span_end + slice_ms - 1) / slice_ms;
  for (std::int64_t k = 0; k < slices; ++k) {
    auto v = slice_vector(events, spec, {k * slice_ms, (k + 1) * slice_ms}, cfg);
    if (v)
      out.push_back(std::move(*v));
    else if (skipped)
      ++*skipped;
  }
  return out;
}

std::optional<PreparedUser> prepare_user(const Dataset::User& user,
                                         const std::vector<FeatureSpec>& spec,
                                         const EvalConfig& cfg) {
  PreparedUser p;
  p.id = user.id;
  RawSample train = clean_outliers(
      extract_features(user.train, spec,
                       {0, std::numeric_limits<std::int64_t>::max()}),
      cfg.outlier_threshold_ms);
  try {
    p.tmpl = build_template({train}, spec, cfg.d, cfg.range);
  } catch (const AvailabilityError&) {
    return std::nullopt;  // training session lacks a required feature
  }
  p.train_slices = slice_vectors(user.train, spec, cfg, nullptr);
  p.test_slices = slice_vectors(user.test, spec, cfg, &p.skipped_test_slices);
  p.avail = availability(user.test, spec, cfg.slice_minutes, cfg.min_samples);
  return p;
}

Rng trial_rng(const EvalConfig& cfg, const Dataset& dataset, std::size_t kappa_idx,
              int user_id) {
  return Rng(mix(mix(dataset.seed, cfg.trial_seed),
                 mix(kappa_idx + 1, static_cast<std::uint64_t>(user_id) + 7)));
}

// Fold-local LDA model with the public discretization parameters that go
// with it: per-component ranges and the population (within-user) sd.
struct FoldModel {
  LdaModel model;
  std::vector<double> sigma;
  std::vector<DiscretizeRange> ranges;
  std::vector<DiscretizeRange> scale_ranges;  // zero-based widths for kappa
};

FoldModel train_fold(const std::vector<PreparedUser>& users, int excluded_id,
                     const EvalConfig& cfg) {
  std::vector<UserSamples> training;
  for (const auto& u : users) {
    if (u.id == excluded_id) continue;
    if (u.train_slices.size() < 2) continue;  // need within-user spread
    UserSamples s;
    s.owner = u.id;
    s.x.resize(static_cast<Eigen::Index>(u.train_slices.size()),
               static_cast<Eigen::Index>(u.train_slices.front().size()));
    for (std::size_t r = 0; r < u.train_slices.size(); ++r)
      for (std::size_t c = 0; c < u.train_slices[r].size(); ++c)
        s.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            static_cast<double>(u.train_slices[r].values[c]);
    training.push_back(std::move(s));
  }
  if (training.size() < 2)
    throw ValidationError("fold has fewer than two trainable users");
  // Cross-validation hygiene: the held-out user must not leak into the fold.
  for (const auto& s : training)
    if (s.owner == excluded_id)
      throw ValidationError("excluded user present in fold training data");

  Eigen::MatrixXd sw = scatter_within(training);
  std::vector<Eigen::RowVectorXd> means;
  means.reserve(training.size());
  for (const auto& s : training) means.push_back(s.mean());
  Eigen::MatrixXd sb = scatter_between(means);

  FoldModel fold;
  fold.model = solve_lda(sw, sb, std::max(default_ridge(sw), 1e-9));

  const Eigen::Index k = fold.model.w.cols();
  Eigen::VectorXd var_sum = Eigen::VectorXd::Zero(k);
  Eigen::RowVectorXd pooled_sum = Eigen::RowVectorXd::Zero(k);
  Eigen::RowVectorXd pooled_sq = Eigen::RowVectorXd::Zero(k);
  long rows = 0;
  for (const auto& s : training) {
    Eigen::MatrixXd t = s.x * fold.model.w;
    Eigen::RowVectorXd mu = t.colwise().mean();
    Eigen::MatrixXd centered = t.rowwise() - mu;
    var_sum += centered.array().square().colwise().mean().matrix().transpose();
    pooled_sum += t.colwise().sum();
    pooled_sq += t.array().square().colwise().sum().matrix();
    rows += t.rows();
  }
  Eigen::VectorXd within_var = var_sum / static_cast<double>(training.size());
  fold.model.v = within_var;

  for (Eigen::Index c = 0; c < k; ++c) {
    const double mean = pooled_sum(c) / static_cast<double>(rows);
    const double ex2 = pooled_sq(c) / static_cast<double>(rows);
    double sd = std::sqrt(std::max(0.0, ex2 - mean * mean));
    if (sd <= 0) sd = 0.5;  // degenerate component still needs a range
    const double half = cfg.lda_range_sigmas * sd;
    fold.ranges.push_back({mean - half, mean + half});
    fold.scale_ranges.push_back({0.0, 2.0 * half});
    fold.sigma.push_back(std::sqrt(std::max(0.0, within_var(c))));
  }
  return fold;
}

FeatureVector discretize_lda(const Eigen::RowVectorXd& x, const FoldModel& fold,
                             int d) {
  FeatureVector out;
  out.d = d;
  out.values.resize(static_cast<std::size_t>(x.size()));
  for (Eigen::Index c = 0; c < x.size(); ++c)
    out.values[static_cast<std::size_t>(c)] =
        discretize(x(c), d, fold.ranges[static_cast<std::size_t>(c)]);
  return out;
}

Eigen::RowVectorXd as_row(const FeatureVector& v) {
  Eigen::RowVectorXd row(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    row(static_cast<Eigen::Index>(i)) = static_cast<double>(v.values[i]);
  return row;
}

void finalize_rates(OperatingPoint& pt) {
  pt.far = pt.impostor_trials
               ? static_cast<double>(pt.impostor_successes) /
                     static_cast<double>(pt.impostor_trials)
               : 0.0;
  pt.frr = pt.genuine_trials ? static_cast<double>(pt.genuine_failures) /
                                   static_cast<double>(pt.genuine_trials)
                             : 0.0;
}

}  // namespace

Dataset dataset_from_population(const SyntheticPopulation& pop) {
  Dataset ds;
  ds.spec = pop.spec;
  ds.seed = pop.seed;
  for (int u = 0; u < pop.config.users; ++u) {
    Dataset::User user;
    user.id = u;
    user.train = generate_session(pop, u, 0);
    user.test = pop.config.sessions > 1 ? generate_session(pop, u, 1) : user.train;
    ds.users.push_back(std::move(user));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  ds.spec = default_full_spec();
  const auto manifest_path = dir / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    const auto manifest = nlohmann::json::parse(read_file(manifest_path));
    if (manifest.contains("seed")) ds.seed = manifest["seed"].get<std::uint64_t>();
  }
  std::map<int, Dataset::User> users;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("user", 0) != 0 || entry.path().extension() != ".csv") continue;
    const auto underscore = name.find("_s");
    if (underscore == std::string::npos) continue;
    const int id = std::stoi(name.substr(4, underscore - 4));
    const int session = std::stoi(name.substr(underscore + 2));
    auto events = parse_keystroke_log(read_file(entry.path())).events;
    auto& user = users[id];
    user.id = id;
    if (session <= 1)
      user.train = std::move(events);
    else
      user.test = std::move(events);
  }
  for (auto& [id, user] : users) {
    if (user.train.empty()) throw Error("user " + std::to_string(id) + " has no training session");
    if (user.test.empty()) user.test = user.train;
    ds.users.push_back(std::move(user));
  }
  if (ds.users.empty()) throw Error("no user logs found in " + dir.string());
  return ds;
}

OperatingPoint compute_eer(const std::vector<OperatingPoint>& sweep) {
  if (sweep.empty()) throw ValidationError("EER needs a non-empty sweep");
  const OperatingPoint* best = &sweep.front();
  for (const auto& pt : sweep) {
    const double gap = std::abs(pt.far - pt.frr);
    const double best_gap = std::abs(best->far - best->frr);
    if (gap < best_gap) {
      best = &pt;
    } else if (gap == best_gap) {
      const double sum = pt.far + pt.frr, best_sum = best->far + best->frr;
      if (sum < best_sum || (sum == best_sum && pt.kappa < best->kappa)) best = &pt;
    }
  }
  return *best;
}

EntropyReport compute_entropy(const SpcCode& code,
                              const std::vector<FeatureVector>& templates) {
  // Accepts any scaling profile, including all-zero exponents: this is a
  // measurement, not a committable code, so the parity-bit rule is not
  // enforced here.
  if (code.n < 1 || static_cast<int>(code.l.size()) != code.n)
    throw ValidationError("malformed scaling profile");
  if (code.d < 1 || code.d > 24) throw ValidationError("bit width out of range");
  for (int li : code.l)
    if (li < 0 || li > code.d) throw ValidationError("scaling exponent out of range");
  if (templates.size() < 2)
    throw ValidationError("entropy needs at least two templates");
  for (const auto& t : templates)
    if (static_cast<int>(t.size()) != code.n || t.d != code.d)
      throw ValidationError("template does not match the code");

  EntropyReport report;
  report.key_bits = static_cast<double>(log2_codeword_count(code));
  double total = 0.0;
  for (int i = 0; i < code.n; ++i) {
    std::map<std::uint32_t, long> counts;
    for (const auto& t : templates) ++counts[t.values[static_cast<std::size_t>(i)]];
    double h = 0.0;
    for (const auto& [value, count] : counts) {
      const double p = static_cast<double>(count) / static_cast<double>(templates.size());
      h -= p * std::log2(p);
    }
    total += std::min(h, static_cast<double>(code.d - code.l[static_cast<std::size_t>(i)]));
  }
  report.entropy_pct = total / (static_cast<double>(code.n) * code.d);
  return report;
}

EvalReport run_zero_effort(const Dataset& dataset, const EvalConfig& config) {
  if (dataset.users.size() < 2)
    throw ValidationError("zero-effort evaluation needs >= 2 users");

  EvalReport report;
  report.mode = "plain";
  report.slice_minutes = config.slice_minutes;
  report.min_samples = config.min_samples;
  report.dataset_seed = dataset.seed;

  std::vector<PreparedUser> users;
  for (const auto& u : dataset.users) {
    auto p = prepare_user(u, dataset.spec, config);
    if (p)
      users.push_back(std::move(*p));
    else
      ++report.dropped_users;
  }
  if (users.size() < 2) throw ValidationError("fewer than two usable users");

  // Global per-feature deviation, converted from discretized cells back to
  // feature units so the scaling formula sees the same units it discretizes.
  const double cell_width = (config.range.max_value - config.range.min_value) /
                            static_cast<double>((1u << config.d) - 1);
  const std::size_t n = dataset.spec.size();
  std::vector<double> sigma(n, 0.0);
  for (const auto& u : users)
    for (std::size_t i = 0; i < n; ++i) sigma[i] += u.tmpl.variance[i];
  for (double& s : sigma)
    s = std::sqrt(s / static_cast<double>(users.size())) * cell_width;

  double avail = 0.0;
  for (const auto& u : users) {
    avail += u.avail;
    report.usable_slices += static_cast<long>(u.test_slices.size());
    report.skipped_slices += u.skipped_test_slices;
  }
  report.availability = avail / static_cast<double>(users.size());

  const std::vector<double> sweep =
      config.kappa_sweep.empty() ? default_sweep() : config.kappa_sweep;
  for (std::size_t ki = 0; ki < sweep.size(); ++ki) {
    const double kappa = sweep[ki];
    const SpcCode code = derive_scaling(sigma, kappa, config.d, config.range);

    std::vector<Commitment> commitments;
    commitments.reserve(users.size());
    for (const auto& u : users) {
      Rng rng = trial_rng(config, dataset, ki, u.id);
      commitments.push_back(commit(u.tmpl.mean, code, rng).first);
    }

    OperatingPoint pt;
    pt.kappa = kappa;
    for (std::size_t v = 0; v < users.size(); ++v) {
      for (std::size_t a = 0; a < users.size(); ++a) {
        for (const auto& slice : users[a].test_slices) {
          const bool ok =
              decommit(slice, commitments[v], config.key_derivation_input)
                  .has_value();
          if (a == v) {
            ++pt.genuine_trials;
            if (!ok) ++pt.genuine_failures;
          } else {
            ++pt.impostor_trials;
            if (ok) ++pt.impostor_successes;
          }
        }
      }
    }
    finalize_rates(pt);
    report.sweep.push_back(pt);
  }

  report.eer = compute_eer(report.sweep);
  const SpcCode eer_code = derive_scaling(sigma, report.eer.kappa, config.d, config.range);
  std::vector<FeatureVector> templates;
  templates.reserve(users.size());
  for (const auto& u : users) templates.push_back(u.tmpl.mean);
  const EntropyReport entropy = compute_entropy(eer_code, templates);
  report.key_bits = entropy.key_bits;
  report.entropy_pct = entropy.entropy_pct;
  return report;
}

EvalReport run_crossval_lda(const Dataset& dataset, const EvalConfig& config) {
  if (dataset.users.size() < 3)
    throw ValidationError("cross-validation needs >= 3 users");

  EvalReport report;
  report.mode = "lda";
  report.slice_minutes = config.slice_minutes;
  report.min_samples = config.min_samples;
  report.dataset_seed = dataset.seed;

  std::vector<PreparedUser> users;
  for (const auto& u : dataset.users) {
    auto p = prepare_user(u, dataset.spec, config);
    if (p)
      users.push_back(std::move(*p));
    else
      ++report.dropped_users;
  }
  if (users.size() < 3) throw ValidationError("fewer than three usable users");

  double avail = 0.0;
  for (const auto& u : users) {
    avail += u.avail;
    report.usable_slices += static_cast<long>(u.test_slices.size());
    report.skipped_slices += u.skipped_test_slices;
  }
  report.availability = avail / static_cast<double>(users.size());

  const std::vector<double> sweep =
      config.kappa_sweep.empty() ? default_sweep() : config.kappa_sweep;
  std::vector<OperatingPoint> points(sweep.size());
  for (std::size_t ki = 0; ki < sweep.size(); ++ki) points[ki].kappa = sweep[ki];

  for (std::size_t fold = 0; fold < users.size(); ++fold) {
    const PreparedUser& impostor = users[fold];
    FoldModel fm;
    try {
      fm = train_fold(users, impostor.id, config);
    } catch (const Error&) {
      continue;  // fold skipped; diagnostics carried by the trial counts
    }

    // Transform once per fold; the kappa sweep only reshapes the code.
    std::vector<std::size_t> enrolled;
    std::vector<FeatureVector> enrolled_tmpl;
    std::vector<std::vector<FeatureVector>> enrolled_slices;
    for (std::size_t v = 0; v < users.size(); ++v) {
      if (v == fold) continue;
      enrolled.push_back(v);
      enrolled_tmpl.push_back(
          discretize_lda(transform(as_row(users[v].tmpl.mean), fm.model), fm, config.d));
      std::vector<FeatureVector> slices;
      for (const auto& s : users[v].test_slices)
        slices.push_back(discretize_lda(transform(as_row(s), fm.model), fm, config.d));
      enrolled_slices.push_back(std::move(slices));
    }
    std::vector<FeatureVector> impostor_slices;
    for (const auto& s : impostor.test_slices)
      impostor_slices.push_back(
          discretize_lda(transform(as_row(s), fm.model), fm, config.d));

    for (std::size_t ki = 0; ki < sweep.size(); ++ki) {
      const SpcCode code =
          derive_scaling(fm.sigma, sweep[ki], config.d, fm.scale_ranges);
      OperatingPoint& pt = points[ki];
      for (std::size_t e = 0; e < enrolled.size(); ++e) {
        Rng rng = trial_rng(config, dataset, ki,
                            static_cast<int>(1000 * (fold + 1)) + users[enrolled[e]].id);
        const Commitment com = commit(enrolled_tmpl[e], code, rng).first;
        for (const auto& slice : enrolled_slices[e]) {
          ++pt.genuine_trials;
          if (!decommit(slice, com, config.key_derivation_input)) ++pt.genuine_failures;
        }
        for (const auto& slice : impostor_slices) {
          ++pt.impostor_trials;
          if (decommit(slice, com, config.key_derivation_input)) ++pt.impostor_successes;
        }
      }
    }
  }

  for (auto& pt : points) finalize_rates(pt);
  report.sweep = std::move(points);
  report.eer = compute_eer(report.sweep);

  // Entropy is reported for the production model (all users enrolled).
  FoldModel full = train_fold(users, -1, config);
  const SpcCode eer_code =
      derive_scaling(full.sigma, report.eer.kappa, config.d, full.scale_ranges);
  std::vector<FeatureVector> templates;
  for (const auto& u : users)
    templates.push_back(
        discretize_lda(transform(as_row(u.tmpl.mean), full.model), full, config.d));
  const EntropyReport entropy = compute_entropy(eer_code, templates);
  report.key_bits = entropy.key_bits;
  report.entropy_pct = entropy.entropy_pct;
  return report;
}

// ---------------------------------------------------------------------------
// Protocol bench
// ---------------------------------------------------------------------------

std::vector<BenchResult> bench_pplda(const std::vector<int>& feature_counts,
                                     const std::vector<long>& user_counts,
                                     const he::HeParams& params,
                                     std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  namespace pp = pplda;

  std::vector<BenchResult> results;
  for (int n : feature_counts) {
    for (long m : user_counts) {
      Rng rng(mix(seed, mix(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m))));
      auto [pk, sk] = he::keygen(params, rng);

      he::OpCounters user_counters, es_counters, mp_counters;
      pp::SystemConfig sys;
      sys.n = n;
      sys.d = 8;
      sys.m_max = std::max<long>(m, 8);
      pp::EnrollmentServer es(pk, n, rng, &es_counters);
      pp::MatrixPublisher mp(sk, pp::BatchPolicy{1}, sys.codec, rng, &mp_counters);

      auto make_input = [&](long user_index) {
        // Two samples symmetric about an integer mean: exact statistics.
        UserSamples samples;
        samples.owner = static_cast<int>(user_index);
        samples.x.resize(2, n);
        for (int j = 0; j < n; ++j) {
          const double mean = static_cast<double>(rng.uniform(1u << sys.d));
          const double offset = static_cast<double>(rng.uniform(8) + 1);
          samples.x(0, j) = mean - offset;
          samples.x(1, j) = mean + offset;
        }
        return pp::prepare_enrollment(samples, sys.codec);
      };

      BenchResult result;
      result.n = n;
      result.m = m;
      for (long u = 0; u < m; ++u) {
        const bool measured = (u == m - 1);
        const he::OpCounters user_before = user_counters;
        const he::OpCounters es_before = es_counters;
        const he::OpCounters mp_before = mp_counters;

        pp::UserClient client(pk, sys, rng, &user_counters);
        const pp::EnrollmentInput input = make_input(u);

        auto t0 = Clock::now();
        pp::Enroll1Msg e1 = client.round1(input);
        auto t1 = Clock::now();
        pp::EsReplyMsg reply = es.begin_enrollment(e1);
        auto t2 = Clock::now();
        pp::Enroll2Msg e2 = client.round2(reply);
        auto t3 = Clock::now();
        pp::EsOutputMsg output = es.complete_enrollment(e2);
        auto t4 = Clock::now();
        pp::MpPublishMsg publish = mp.process(output);
        auto t5 = Clock::now();
        (void)publish;

        if (measured) {
          auto ms = [](auto a, auto b) {
            return std::chrono::duration<double, std::milli>(b - a).count();
          };
          result.user_ms = ms(t0, t1) + ms(t2, t3);
          result.es_ms = ms(t1, t2) + ms(t3, t4);
          result.mp_ms = ms(t4, t5);
          result.user_es_bytes = pp::wire_encode(e1, pk).size() +
                                 pp::wire_encode(reply, pk).size() +
                                 pp::wire_encode(e2, pk).size();
          result.es_mp_bytes = pp::wire_encode(output, pk).size();
          auto diff = [](const he::OpCounters& after, const he::OpCounters& before) {
            he::OpCounters d;
            d.encrypt = after.encrypt - before.encrypt;
            d.decrypt = after.decrypt - before.decrypt;
            d.add = after.add - before.add;
            d.scalar_mul = after.scalar_mul - before.scalar_mul;
            d.rerandomize = after.rerandomize - before.rerandomize;
            return d;
          };
          result.user = diff(user_counters, user_before);
          result.es = diff(es_counters, es_before);
          result.mp = diff(mp_counters, mp_before);
        }
      }
      results.push_back(result);
    }
  }
  return results;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

nlohmann::json point_json(const OperatingPoint& pt) {
  return nlohmann::json{{"kappa", pt.kappa},
                        {"far", pt.far},
                        {"frr", pt.frr},
                        {"genuine_trials", pt.genuine_trials},
                        {"genuine_failures", pt.genuine_failures},
                        {"impostor_trials", pt.impostor_trials},
                        {"impostor_successes", pt.impostor_successes}};
}

nlohmann::json counters_json(const he::OpCounters& c) {
  return nlohmann::json{{"encrypt", c.encrypt},
                        {"decrypt", c.decrypt},
                        {"add", c.add},
                        {"scalar_mul", c.scalar_mul},
                        {"rerandomize", c.rerandomize}};
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json sweep_json = nlohmann::json::array();
  for (const auto& pt : sweep) sweep_json.push_back(point_json(pt));
  return nlohmann::json{{"mode", mode},
                        {"slice_minutes", slice_minutes},
                        {"min_samples", min_samples},
                        {"dataset_seed", dataset_seed},
                        {"sweep", sweep_json},
                        {"eer", point_json(eer)},
                        {"availability", availability},
                        {"key_bits", key_bits},
                        {"entropy_pct", entropy_pct},
                        {"usable_slices", usable_slices},
                        {"skipped_slices", skipped_slices},
                        {"dropped_users", dropped_users}};
}

nlohmann::json BenchResult::to_json() const {
  return nlohmann::json{{"n", n},
                        {"m", m},
                        {"user_ms", user_ms},
                        {"es_ms", es_ms},
                        {"mp_ms", mp_ms},
                        {"user_es_bytes", user_es_bytes},
                        {"es_mp_bytes", es_mp_bytes},
                        {"user_ops", counters_json(user)},
                        {"es_ops", counters_json(es)},
                        {"mp_ops", counters_json(mp)}};
}

}  // namespace keyforge
