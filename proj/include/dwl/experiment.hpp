#pragma once

// Experiment configuration and the solve -> simulate -> stats pipeline.
//
// A config is a YAML document (JSON is accepted as a YAML subset). Every
// field has a default, so `measure: "0:1"` alone is a valid config. Tests
// run only when named under `tests:`.
//
//   measure: "-2:0.5,2:0.5"
//   law: gaussian-complex        # entry law, see EntryDistribution::parse
//   n: [1000]                    # one run per size
//   trials: 20
//   seed: 42
//   tests:
//     concentration: {tolerance: 0.05}
//     delocalization: {}

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "dwl/bk_oracle.hpp"
#include "dwl/ensemble.hpp"
#include "dwl/error.hpp"
#include "dwl/io.hpp"
#include "dwl/measure.hpp"
#include "dwl/parallel.hpp"
#include "dwl/report.hpp"
#include "dwl/spectral_stats.hpp"
#include "dwl/stieltjes.hpp"

namespace dwl {

/// Exit status of a run.
enum class ExitCode : int { Ok = 0, TestsFailed = 1, ConfigError = 2, SolverFailure = 3, BackendFailure = 4 };

// ---------------------------------------------------------------------------
// YAML to JSON

namespace detail {

inline json yaml_scalar(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  // Quoted scalars carry the "!" tag and stay strings.
  if (node.Tag() == "!") return s;
  if (s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  return s;
}

inline json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return yaml_scalar(node);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

}  // namespace detail

/// Parses YAML or JSON text into a JSON value.
inline json parse_config_text(const std::string& text) {
  try {
    return detail::yaml_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Config

struct GridSpec {
  double lo = -5.0;
  double hi = 5.0;
  int count = 2001;
};

/// "lo:hi:count".
inline GridSpec parse_grid(std::string_view text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw InvalidArgument("grid must look like lo:hi:count, got '" + std::string(text) + "'");
  GridSpec g;
  g.lo = detail::parse_double(text.substr(0, c1), "grid lower bound");
  g.hi = detail::parse_double(text.substr(c1 + 1, c2 - c1 - 1), "grid upper bound");
  const double count = detail::parse_double(text.substr(c2 + 1), "grid count");
  if (count != std::floor(count) || count < 2) throw InvalidArgument("grid count must be an integer >= 2");
  g.count = static_cast<int>(count);
  if (!(g.hi > g.lo)) throw InvalidArgument("grid upper bound must exceed the lower bound");
  return g;
}

struct ExperimentConfig {
  std::string measure = "0:1";
  std::string law = "gaussian-complex";
  std::optional<double> diagonal_variance;
  bool truncate = false;
  double truncation_exponent = 1.0;
  std::vector<int> n = {200};
  int trials = 5;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: DWL_WORKERS or hardware width
  std::string output_dir = "out";
  bool save_samples = false;
  GridSpec grid;
  double eta_floor = 1e-6;
  double support_threshold = 1e-7;
  double epsilon = 0.05;
  std::optional<double> x0;
  double window = 20.0;
  json tests = json::object();  // test name -> parameter object

  bool selected(const std::string& name) const { return tests.contains(name); }

  /// Parameter `key` of test `name`, or `fallback`.
  template <class T>
  T test_param(const std::string& name, const std::string& key, T fallback) const {
    if (!tests.contains(name) || !tests[name].is_object() || !tests[name].contains(key)) return fallback;
    try {
      return tests[name][key].get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument("config: tests." + name + "." + key + " has the wrong type");
    }
  }

  json to_json() const {
    json j;
    j["measure"] = measure;
    j["law"] = law;
    j["diagonal_variance"] = diagonal_variance ? json(*diagonal_variance) : json(nullptr);
    j["truncate"] = truncate;
    j["truncation_exponent"] = truncation_exponent;
    j["n"] = n;
    j["trials"] = trials;
    j["seed"] = seed;
    j["workers"] = workers;
    j["output_dir"] = output_dir;
    j["save_samples"] = save_samples;
    j["grid"] = {{"lo", grid.lo}, {"hi", grid.hi}, {"count", grid.count}};
    j["eta_floor"] = eta_floor;
    j["support_threshold"] = support_threshold;
    j["epsilon"] = epsilon;
    j["x0"] = x0 ? json(*x0) : json(nullptr);
    j["window"] = window;
    j["tests"] = tests;
    return j;
  }

  /// The fields that determine the report payload (not workers or paths).
  std::string digest() const {
    json j = to_json();
    j.erase("workers");
    j.erase("output_dir");
    j.erase("save_samples");
    const std::string text = j.dump();
    return fnv1a_hex(text.data(), text.size());
  }

  static inline const std::vector<std::string> kKnownTests = {
      "concentration", "gap_occupancy", "pastur_residual", "delocalization", "gaps", "correlation", "universality"};

  static ExperimentConfig from_json(const json& j) {
    if (!j.is_object()) throw InvalidArgument("config: top level must be a mapping");
    static const std::vector<std::string> known = {
        "measure", "law", "diagonal_variance", "truncate", "truncation_exponent", "n", "trials", "seed", "workers",
        "output_dir", "save_samples", "grid", "eta_floor", "support_threshold", "epsilon", "x0", "window", "tests"};
    for (const auto& [key, value] : j.items())
      if (std::find(known.begin(), known.end(), key) == known.end()) throw InvalidArgument("config: unknown key '" + key + "'");

    ExperimentConfig c;
    auto get = [&](const char* key, auto& field) {
      if (!j.contains(key) || j[key].is_null()) return;
      try {
        field = j[key].get<std::decay_t<decltype(field)>>();
      } catch (const json::exception&) {
        throw InvalidArgument(std::string("config: '") + key + "' has the wrong type");
      }
    };
    get("measure", c.measure);
    get("law", c.law);
    if (j.contains("diagonal_variance") && !j["diagonal_variance"].is_null()) {
      double v = 0.0;
      get("diagonal_variance", v);
      c.diagonal_variance = v;
    }
    get("truncate", c.truncate);
    get("truncation_exponent", c.truncation_exponent);
    if (j.contains("n")) {
      if (j["n"].is_number_integer()) c.n = {j["n"].get<int>()};
      else get("n", c.n);
    }
    get("trials", c.trials);
    get("seed", c.seed);
    get("workers", c.workers);
    get("output_dir", c.output_dir);
    get("save_samples", c.save_samples);
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      if (g.is_string()) {
        c.grid = parse_grid(g.get<std::string>());
      } else if (g.is_object()) {
        try {
          c.grid.lo = g.value("lo", c.grid.lo);
          c.grid.hi = g.value("hi", c.grid.hi);
          c.grid.count = g.value("count", c.grid.count);
        } catch (const json::exception&) {
          throw InvalidArgument("config: grid fields have the wrong type");
        }
      } else {
        throw InvalidArgument("config: grid must be 'lo:hi:count' or a mapping");
      }
    }
    get("eta_floor", c.eta_floor);
    get("support_threshold", c.support_threshold);
    get("epsilon", c.epsilon);
    if (j.contains("x0") && !j["x0"].is_null()) {
      double v = 0.0;
      get("x0", v);
      c.x0 = v;
    }
    get("window", c.window);
    if (j.contains("tests") && !j["tests"].is_null()) {
      const auto& t = j["tests"];
      if (t.is_array()) {
        for (const auto& name : t) c.tests[name.get<std::string>()] = json::object();
      } else if (t.is_object()) {
        for (const auto& [name, params] : t.items()) c.tests[name] = params.is_null() ? json::object() : params;
      } else {
        throw InvalidArgument("config: tests must be a list or a mapping");
      }
    }
    c.validate();
    return c;
  }

  static ExperimentConfig parse(const std::string& text) { return from_json(parse_config_text(text)); }

  static ExperimentConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("config: cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  void validate() const {
    parse_atoms(measure);
    entry_law();
    if (n.empty()) throw InvalidArgument("config: n must list at least one size");
    for (int v : n)
      if (v < 2) throw InvalidArgument("config: every n must be at least 2");
    if (trials < 1) throw InvalidArgument("config: trials must be positive");
    if (grid.count < 2 || !(grid.hi > grid.lo)) throw InvalidArgument("config: invalid grid");
    if (!(eta_floor > 0.0 && eta_floor <= 1e-3)) throw InvalidArgument("config: eta_floor must lie in (0, 1e-3]");
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw InvalidArgument("config: epsilon must lie in (0, 1/2)");
    if (!(window >= 0.0)) throw InvalidArgument("config: window must be nonnegative");
    for (const auto& [name, params] : tests.items()) {
      if (std::find(kKnownTests.begin(), kKnownTests.end(), name) == kKnownTests.end())
        throw InvalidArgument("config: unknown test '" + name + "'");
      if (!params.is_object()) throw InvalidArgument("config: parameters of test '" + name + "' must be a mapping");
    }
    if (selected("universality")) {
      const auto b = test_param<std::string>("universality", "law_b", "");
      if (b.empty()) throw InvalidArgument("config: universality needs tests.universality.law_b");
      EntryDistribution::parse(b);
      if (trials < static_cast<int>(kMinTwoSampleSize))
        throw InvalidArgument("config: universality needs at least 100 trials");
    }
    if (selected("delocalization") && n.size() < 2 && tests["delocalization"].contains("slope_range"))
      throw InvalidArgument("config: the delocalization slope needs at least two sizes in n");
  }

  EntryDistribution entry_law() const {
    return diagonal_variance ? EntryDistribution::parse(law, *diagonal_variance) : EntryDistribution::parse(law);
  }

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return a.to_json() == b.to_json(); }
};

// ---------------------------------------------------------------------------
// Pipeline pieces shared with the CLI

/// Up to `count` intervals of length `length`, spread over the bulk of the
/// support (each interval trimmed by 10% of its length at both ends) in
/// proportion to interval length.
inline std::vector<Interval> default_bulk_intervals(const SupportProfile& support, int count = 10,
                                                    double length = 0.1) {
  std::vector<Interval> inner;
  double total = 0.0;
  for (const auto& I : support.intervals) {
    const double trim = 0.1 * (I.hi - I.lo);
    if (I.hi - I.lo - 2 * trim > length) {
      inner.push_back({I.lo + trim, I.hi - trim});
      total += inner.back().length() - length;
    }
  }
  std::vector<Interval> out;
  if (inner.empty()) return out;
  for (int k = 0; k < count; ++k) {
    // Position of the k-th start along the concatenated usable lengths.
    double s = (k + 0.5) / count * total;
    for (const auto& I : inner) {
      const double usable = I.length() - length;
      if (s <= usable || &I == &inner.back()) {
        const double a = I.lo + std::min(s, usable);
        out.push_back({a, a + length});
        break;
      }
      s -= usable;
    }
  }
  return out;
}

/// Central part (at most 0.2 wide, at most half the gap) of each gap
/// between consecutive support intervals.
inline std::vector<Interval> default_gap_intervals(const SupportProfile& support) {
  std::vector<Interval> out;
  for (std::size_t j = 1; j < support.intervals.size(); ++j) {
    const double lo = support.intervals[j - 1].hi, hi = support.intervals[j].lo;
    const double half = 0.5 * std::min(0.2, 0.5 * (hi - lo));
    const double mid = 0.5 * (lo + hi);
    out.push_back({mid - half, mid + half});
  }
  return out;
}

inline double default_x0(const SupportProfile& support) {
  if (support.intervals.empty()) throw InvalidArgument("no support interval to place x0 in");
  const auto& I = support.intervals.back();
  return 0.5 * (I.lo + I.hi);
}

/// Ensemble for `law` with the diagonal drawn from the same family.
inline EnsembleSpec ensemble_for(const EntryDistribution& law, int n, std::uint64_t seed, bool truncate = false,
                                 double exponent = 1.0) {
  auto spec = EnsembleSpec::for_law(n, law, seed);
  spec.truncate = truncate;
  spec.truncation_exponent = exponent;
  return spec;
}

/// Seed for the second side of a two-sample comparison.
inline std::uint64_t side_b_seed(std::uint64_t seed) { return mix64(seed ^ 0x5eed0b0bull); }

/// Eigenvalues (and optionally eigenvectors) of trials [0, trials) of
/// `spec` + diag, computed on a bounded pool. `reduce` receives each sample
/// by value so large eigenvector matrices can be discarded immediately.
template <class Reduce>
void run_trials(const EnsembleSpec& spec, const DiagonalRealization& diag, int trials, bool want_vectors,
                int workers, Reduce&& reduce) {
  parallel_for(
      trials,
      [&](int t) {
        const auto s = spec.with_trial(static_cast<std::uint32_t>(t));
        auto sample = eigendecompose(assemble(s, diag), want_vectors);
        sample.provenance = s.describe();
        reduce(t, std::move(sample));
      },
      workers > 0 ? workers : default_workers());
}

inline std::vector<SpectralSample> simulate(const EnsembleSpec& spec, const DiagonalRealization& diag, int trials,
                                            bool want_vectors = false, int workers = 0) {
  std::vector<SpectralSample> out(static_cast<std::size_t>(trials));
  run_trials(spec, diag, trials, want_vectors, workers,
             [&](int t, SpectralSample s) { out[static_cast<std::size_t>(t)] = std::move(s); });
  return out;
}

inline json provenance_for(const EnsembleSpec& spec, const DiagonalRealization& diag, const AtomicMeasure& measure,
                           int trials) {
  json p;
  p["ensemble"] = spec.with_trial(0).describe();
  p["spec_digest"] = digest(spec.with_trial(0), &diag);
  p["measure"] = format_atoms(measure);
  p["seed"] = spec.seed;
  p["trials"] = {0, trials};
  return p;
}

/// The 1-based index whose eigenvalue sits nearest x0 in quantile terms.
inline int index_near(const DensityProfile& density, double x0, int n) {
  const double mass = density.integrate(density.grid.front(), x0) / std::max(density.total_mass(), 1e-300);
  return std::clamp(static_cast<int>(std::lround(mass * n)), 1, n - 1);
}

struct UniversalityResult {
  TwoSampleResult test;
  int index = 0;
  std::vector<double> side_a;
  std::vector<double> side_b;
};

/// Bulk-gap statistic n (lambda_{i+1} - lambda_i) at a fixed index for two
/// entry laws sharing the same diagonal, compared by a permutation KS test.
inline UniversalityResult universality(const EntryDistribution& law_a, const EntryDistribution& law_b,
                                       const DiagonalRealization& diag, int index, int trials, std::uint64_t seed,
                                       int shuffles = kMinShuffles, int workers = 0, bool truncate = false) {
  UniversalityResult r;
  r.index = index;
  r.side_a.resize(static_cast<std::size_t>(trials));
  r.side_b.resize(static_cast<std::size_t>(trials));
  const auto a = ensemble_for(law_a, diag.n, seed, truncate);
  const auto b = ensemble_for(law_b, diag.n, side_b_seed(seed), truncate);
  run_trials(a, diag, trials, false, workers,
             [&](int t, SpectralSample s) { r.side_a[static_cast<std::size_t>(t)] = bulk_gap_statistic(s, index); });
  run_trials(b, diag, trials, false, workers,
             [&](int t, SpectralSample s) { r.side_b[static_cast<std::size_t>(t)] = bulk_gap_statistic(s, index); });
  r.test = two_sample_distance(r.side_a, r.side_b, shuffles, seed);
  return r;
}

inline Record universality_record(const UniversalityResult& u, const std::string& law_a, const std::string& law_b,
                                  int n, double alpha, bool expect_same, const json& provenance = json::object()) {
  json params{{"n", n},       {"trials", u.side_a.size()}, {"law_a", law_a},           {"law_b", law_b},
              {"index", u.index}, {"shuffles", u.test.shuffles}, {"expect", expect_same ? "same" : "different"}};
  auto r = make_record(expect_same ? "universality" : "universality_control", params, u.test.p_value, std::nullopt,
                       alpha, expect_same ? Compare::Above : Compare::Below, provenance);
  r.detail["ks_distance"] = number(u.test.distance);
  return r;
}

// ---------------------------------------------------------------------------
// run

struct RunOutput {
  StatsReport report;
  DensityProfile density;
  SupportProfile support;
  std::vector<std::string> artifacts;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Runs the configured pipeline. With `write` set, artifacts go to
/// config.output_dir: density.csv, support.json, report.json and, with
/// save_samples, one CSV per trial.
inline RunOutput run(const ExperimentConfig& config, bool write = true) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::filesystem::path out_dir = config.output_dir;
  const auto measure = parse_atoms(config.measure);
  auto profile = density(measure, make_grid(config.grid.lo, config.grid.hi, config.grid.count), config.eta_floor);
  auto support = support_intervals(profile, config.support_threshold);
  RunOutput out{StatsReport{}, std::move(profile), std::move(support), {}};
  if (write) {
    write_file(out_dir / "density.csv", density_csv(out.density));
    write_file(out_dir / "support.json", support_json(out.support).dump(2) + "\n");
    out.artifacts.push_back((out_dir / "density.csv").string());
    out.artifacts.push_back((out_dir / "support.json").string());
  }

  const auto law = config.entry_law();
  const bool want_vectors = config.selected("delocalization");
  const bool need_clouds = config.selected("correlation");
  const double x0 = config.x0 ? *config.x0 : (out.support.count() ? default_x0(out.support) : 0.0);
  std::vector<double> median_sup;

  for (int n : config.n) {
    const auto diag = realize_diagonal(measure, n);
    const auto spec = ensemble_for(law, n, config.seed, config.truncate, config.truncation_exponent);
    const auto prov = provenance_for(spec, diag, measure, config.trials);
    const auto bulk = bulk_indices(out.support, config.epsilon, n);
    const auto bulk_list = bulk.indices();
    if (want_vectors && bulk_list.empty())
      throw InvalidArgument("delocalization: the (epsilon, n)-bulk is empty for n = " + std::to_string(n));

    std::vector<SpectralSample> samples(static_cast<std::size_t>(config.trials));
    std::vector<DelocalizationTrial> deloc(static_cast<std::size_t>(config.trials));
    run_trials(spec, diag, config.trials, want_vectors, config.workers, [&](int t, SpectralSample s) {
      if (want_vectors) {
        deloc[static_cast<std::size_t>(t)] = delocalization_trial(s, bulk_list);
        if (!config.save_samples) s.eigenvectors.reset();
      }
      samples[static_cast<std::size_t>(t)] = std::move(s);
    });
    if (write && config.save_samples) {
      for (int t = 0; t < config.trials; ++t) {
        const auto path = out_dir / "samples" / ("n" + std::to_string(n) + "_trial" + std::to_string(t) + ".csv");
        write_file(path, sample_csv(samples[static_cast<std::size_t>(t)], digest(spec.with_trial(t), &diag)));
      }
    }

    if (config.selected("concentration")) {
      std::vector<Interval> intervals;
      if (config.tests["concentration"].contains("intervals")) {
        for (const auto& iv : config.tests["concentration"]["intervals"]) intervals.push_back({iv.at(0), iv.at(1)});
      } else {
        intervals = default_bulk_intervals(out.support, config.test_param("concentration", "count", 10),
                                           config.test_param("concentration", "length", 0.1));
      }
      out.report.add(concentration_report(samples, out.density, intervals,
                                          config.test_param("concentration", "tolerance", 0.05), prov));
    }
    if (config.selected("gap_occupancy")) {
      std::vector<Interval> gaps;
      if (config.tests["gap_occupancy"].contains("interval")) {
        const auto& iv = config.tests["gap_occupancy"]["interval"];
        gaps.push_back({iv.at(0), iv.at(1)});
      } else {
        gaps = default_gap_intervals(out.support);
      }
      for (const auto& I : gaps)
        out.report.add(gap_occupancy(samples, I, config.test_param("gap_occupancy", "max_fraction", 0.01), prov));
    }
    if (config.selected("pastur_residual")) {
      const double eta = config.test_param("pastur_residual", "imag", 0.05);
      const int points = config.test_param("pastur_residual", "points", 41);
      std::vector<cplx> zgrid;
      for (double x : make_grid(config.grid.lo, config.grid.hi, points)) zgrid.push_back({x, eta});
      out.report.add(pastur_residual(samples, diag.empirical_measure(measure), zgrid,
                                     config.test_param("pastur_residual", "tolerance", 0.1), prov));
    }
    if (want_vectors) {
      auto r = delocalization_stats(deloc, n, bulk, config.test_param("delocalization", "bound", 10.0), prov);
      median_sup.push_back(r.detail["median_sup_norm"].get<double>());
      out.report.add(std::move(r));
    }
    if (config.selected("gaps")) {
      out.report.add(gap_stats(samples, bulk, config.test_param("gaps", "c0", 1.0),
                               config.test_param("gaps", "max_frequency", 0.01), prov));
    }
    if (need_clouds) {
      const auto clouds = rescale_at(samples, x0, out.density, config.window);
      const double radius = config.test_param("correlation", "radius", 5.0);
      const double tol = config.test_param("correlation", "tolerance", 0.1);
      json params{{"n", n}, {"trials", config.trials}, {"x0", x0}, {"window", config.window}, {"radius", radius}};
      for (const auto& f : {bump_function(radius), separable_pair_function(radius)}) {
        const auto est = correlation_statistic(clouds, f);
        const double ref = correlation_reference(f);
        json p = params;
        p["k"] = f.k;
        p["f"] = f.name;
        auto r = make_record("correlation_k" + std::to_string(f.k), p, est.mean, ref, tol, Compare::RelWithin, prov);
        r.detail["std_error"] = number(est.std_error);
        out.report.add(std::move(r));
      }
      const double width = config.test_param("correlation", "near_width", 0.25);
      const auto near = near_diagonal_function(radius, width);
      const auto est = correlation_statistic(clouds, near);
      const double poisson = correlation_reference(near, ReferenceProcess::Poisson);
      json p = params;
      p["width"] = width;
      auto r = make_record("repulsion", p, est.mean / poisson, 0.0,
                           config.test_param("correlation", "repulsion_ratio", 0.1), Compare::AtMost, prov);
      r.detail["statistic"] = number(est.mean);
      r.detail["poisson_reference"] = number(poisson);
      r.detail["sine_reference"] = number(correlation_reference(near));
      out.report.add(std::move(r));
    }
    if (config.selected("universality")) {
      const auto law_b_name = config.test_param<std::string>("universality", "law_b", "");
      const auto law_b = EntryDistribution::parse(law_b_name);
      const int index = config.test_param("universality", "index", index_near(out.density, x0, n));
      const auto u = universality(law, law_b, diag, index, config.trials, config.seed,
                                  config.test_param("universality", "shuffles", kMinShuffles), config.workers,
                                  config.truncate);
      const bool same = config.test_param<std::string>("universality", "expect", "same") != "different";
      auto p = prov;
      p["seed_b"] = side_b_seed(config.seed);
      out.report.add(universality_record(u, law.name(), law_b.name(), n,
                                         config.test_param("universality", "alpha", 0.01), same, p));
    }
  }

  if (want_vectors && config.n.size() >= 2) {
    const auto range = config.test_param("delocalization", "slope_range", std::vector<double>{-0.55, -0.40});
    if (range.size() != 2) throw InvalidArgument("config: slope_range needs two numbers");
    json prov{{"measure", format_atoms(measure)}, {"law", law.name()}, {"seed", config.seed}};
    out.report.add(delocalization_scaling(config.n, median_sup, range[0], range[1], prov));
  }

  out.report.metadata["generated_at"] = utc_timestamp();
  out.report.metadata["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out.report.metadata["config"] = config.to_json();
  out.report.metadata["config_digest"] = config.digest();
  if (write) {
    write_file(out_dir / "report.json", out.report.to_json().dump(2) + "\n");
    out.artifacts.push_back((out_dir / "report.json").string());
  }
  return out;
}

/// Maps an exception from run() to its exit code.
inline ExitCode classify(const std::exception& e) {
  if (dynamic_cast<const InvalidArgument*>(&e)) return ExitCode::ConfigError;
  if (dynamic_cast<const SolverError*>(&e)) return ExitCode::SolverFailure;
  if (dynamic_cast<const BackendError*>(&e)) return ExitCode::BackendFailure;
  return ExitCode::ConfigError;
}

}  // namespace dwl
