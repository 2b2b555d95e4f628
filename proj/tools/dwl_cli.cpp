// dwl: command-line front end for the density solver, the Monte Carlo
// ensembles and the statistics pipeline.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dwl/bk_oracle.hpp"
#include "dwl/ensemble.hpp"
#include "dwl/experiment.hpp"
#include "dwl/io.hpp"
#include "dwl/measure.hpp"
#include "dwl/report.hpp"
#include "dwl/stieltjes.hpp"

namespace {

using namespace dwl;

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const double v = detail::parse_double(item, "n");
    if (v != std::floor(v) || v < 2) throw InvalidArgument("n must be an integer >= 2, got '" + item + "'");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw InvalidArgument("n is empty");
  return out;
}

std::string summary_table(const json& report) {
  std::ostringstream out;
  for (const auto& r : report.at("records")) {
    out << (r.at("pass").get<bool>() ? "PASS " : "FAIL ") << r.at("test").get<std::string>() << "  observed "
        << r.at("observed").dump() << ' ' << r.at("compare").get<std::string>() << ' ' << r.at("tolerance").dump();
    if (!r.at("reference").is_null()) out << " (reference " << r.at("reference").dump() << ')';
    out << "  " << r.at("params").dump() << '\n';
  }
  out << (report.value("all_pass", false) ? "all tests passed" : "some tests failed") << '\n';
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformed Wigner spectra: limiting density, Monte Carlo ensembles and local statistics"};
  app.require_subcommand(1);

  // solve-density
  std::string atoms = "0:1";
  std::string grid_text = "-5:5:2001";
  double eta_floor = 1e-6;
  double threshold = 1e-7;
  std::string out_path, support_path;
  auto* solve = app.add_subcommand("solve-density", "Density of the deformed semicircle on a grid (CSV x,rho)");
  solve->add_option("--atoms", atoms, "Atoms of the source measure, 'loc:weight,...'")->required();
  solve->add_option("--grid", grid_text, "Grid lo:hi:count")->capture_default_str();
  solve->add_option("--eta-floor", eta_floor, "Smallest imaginary part of the inversion")->capture_default_str();
  solve->add_option("--threshold", threshold, "Support threshold")->capture_default_str();
  solve->add_option("--out", out_path, "CSV output file (default stdout)");
  solve->add_option("--support", support_path, "Write support intervals and quantiles as JSON");

  // bk-density
  double a = 2.0;
  auto* bk = app.add_subcommand("bk-density", "Closed-form density for (1/2)(delta_{-a} + delta_a), a > 1");
  bk->add_option("--a", a, "Atom position")->required();
  bk->add_option("--grid", grid_text, "Grid lo:hi:count")->capture_default_str();
  bk->add_option("--out", out_path, "CSV output file (default stdout)");

  // simulate
  std::string law = "gaussian-complex", sizes = "200", out_dir = "out";
  int trials = 1, workers = 0;
  std::uint64_t seed = 0;
  bool vectors = false, truncate = false;
  std::optional<double> sigma2;
  auto* sim = app.add_subcommand("simulate", "Sample W = M/sqrt(n) + D and write its spectrum as CSV");
  sim->add_option("--atoms", atoms, "Atoms of the source measure")->required();
  sim->add_option("--law", law, "Entry law")->capture_default_str();
  sim->add_option("--sigma2", sigma2, "Diagonal variance of the entry law");
  sim->add_option("--n", sizes, "Matrix size")->capture_default_str();
  sim->add_option("--trials", trials, "Number of trials")->capture_default_str();
  sim->add_option("--seed", seed, "Seed")->capture_default_str();
  sim->add_option("--workers", workers, "Worker threads (0: DWL_WORKERS or hardware width)");
  sim->add_flag("--vectors", vectors, "Also write eigenvectors");
  sim->add_flag("--truncate", truncate, "Clip entries at log^(C+1) n");
  sim->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

  // stats
  std::string config_path, tests;
  double epsilon = 0.05;
  auto* stats = app.add_subcommand("stats", "Run the solve -> simulate -> stats pipeline and write report.json");
  stats->add_option("--config", config_path, "YAML or JSON experiment config");
  stats->add_option("--atoms", atoms, "Atoms (overrides the config)");
  stats->add_option("--law", law, "Entry law (overrides the config)");
  stats->add_option("--n", sizes, "Comma-separated sizes (overrides the config)");
  stats->add_option("--trials", trials, "Trials (overrides the config)");
  stats->add_option("--seed", seed, "Seed (overrides the config)");
  stats->add_option("--epsilon", epsilon, "Bulk margin (overrides the config)");
  stats->add_option("--tests", tests, "Comma-separated test names (overrides the config)");
  stats->add_option("--workers", workers, "Worker threads");
  stats->add_option("--out-dir", out_dir, "Output directory (overrides the config)");

  // universality
  std::string law_a = "gaussian-complex", law_b;
  int shuffles = kMinShuffles, index = 0;
  double alpha = 0.01;
  auto* uni = app.add_subcommand("universality", "Two-sample bulk-gap test between two entry laws (JSON)");
  uni->add_option("--law-a", law_a, "First entry law")->capture_default_str();
  uni->add_option("--law-b", law_b, "Second entry law")->required();
  uni->add_option("--atoms", atoms, "Atoms of the source measure")->required();
  uni->add_option("--n", sizes, "Matrix size")->required();
  uni->add_option("--trials", trials, "Trials per side")->required();
  uni->add_option("--seed", seed, "Seed")->capture_default_str();
  uni->add_option("--shuffles", shuffles, "Permutation shuffles")->capture_default_str();
  uni->add_option("--index", index, "1-based bulk index (default: midpoint of the rightmost interval)");
  uni->add_option("--alpha", alpha, "Significance level")->capture_default_str();
  uni->add_option("--workers", workers, "Worker threads");
  uni->add_option("--out", out_path, "JSON output file (default stdout)");

  // report
  std::string report_path;
  auto* rep = app.add_subcommand("report", "Summarize a report.json; exit 0 iff every test passed");
  rep->add_option("report", report_path, "Path to report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::ConfigError);
  }

  try {
    if (*solve) {
      const auto g = parse_grid(grid_text);
      const auto measure = parse_atoms(atoms);
      const auto profile = density(measure, make_grid(g.lo, g.hi, g.count), eta_floor);
      emit(density_csv(profile), out_path);
      if (!support_path.empty())
        emit(support_json(support_intervals(profile, threshold)).dump(2) + "\n", support_path);
    } else if (*bk) {
      const auto g = parse_grid(grid_text);
      const auto grid = make_grid(g.lo, g.hi, g.count);
      std::vector<double> rho;
      rho.reserve(grid.size());
      for (double x : grid) rho.push_back(bk_density(x, a));
      emit(density_csv(grid, rho), out_path);
    } else if (*sim) {
      const auto measure = parse_atoms(atoms);
      const auto entry = sigma2 ? EntryDistribution::parse(law, *sigma2) : EntryDistribution::parse(law);
      json summary = json::array();
      for (int n : parse_sizes(sizes)) {
        const auto diag = realize_diagonal(measure, n);
        const auto spec = ensemble_for(entry, n, seed, truncate);
        const auto samples = simulate(spec, diag, trials, vectors, workers);
        for (int t = 0; t < trials; ++t) {
          const auto path = std::filesystem::path(out_dir) / ("n" + std::to_string(n) + "_trial" + std::to_string(t) + ".csv");
          const auto d = digest(spec.with_trial(static_cast<std::uint32_t>(t)), &diag);
          write_file(path, sample_csv(samples[static_cast<std::size_t>(t)], d));
          summary.push_back({{"file", path.string()}, {"digest", d}, {"n", n}, {"trial", t}});
        }
      }
      std::cout << summary.dump(2) << '\n';
    } else if (*stats) {
      json cfg = config_path.empty() ? json::object() : ExperimentConfig::load(config_path).to_json();
      if (stats->count("--atoms")) cfg["measure"] = atoms;
      if (stats->count("--law")) cfg["law"] = law;
      if (stats->count("--n")) cfg["n"] = parse_sizes(sizes);
      if (stats->count("--trials")) cfg["trials"] = trials;
      if (stats->count("--seed")) cfg["seed"] = seed;
      if (stats->count("--epsilon")) cfg["epsilon"] = epsilon;
      if (stats->count("--workers")) cfg["workers"] = workers;
      if (stats->count("--out-dir")) cfg["output_dir"] = out_dir;
      if (stats->count("--tests")) {
        cfg["tests"] = json::object();
        std::stringstream in(tests);
        std::string name;
        while (std::getline(in, name, ',')) cfg["tests"][name] = json::object();
      }
      const auto config = ExperimentConfig::from_json(cfg);
      const auto result = run(config);
      std::cout << summary_table(result.report.payload());
      return static_cast<int>(result.report.all_pass() ? ExitCode::Ok : ExitCode::TestsFailed);
    } else if (*uni) {
      const auto measure = parse_atoms(atoms);
      const int n = parse_sizes(sizes).front();
      const auto diag = realize_diagonal(measure, n);
      const auto profile = density(measure, make_grid(-measure.max_abs_location() - 3, measure.max_abs_location() + 3, 2001));
      if (index == 0) index = index_near(profile, default_x0(support_intervals(profile)), n);
      const auto la = EntryDistribution::parse(law_a), lb = EntryDistribution::parse(law_b);
      const auto u = universality(la, lb, diag, index, trials, seed, shuffles, workers);
      json j;
      j["schema_version"] = kSchemaVersion;
      j["law_a"] = la.name();
      j["law_b"] = lb.name();
      j["match_order"] = match_order(la, lb);
      j["n"] = n;
      j["trials"] = trials;
      j["index"] = index;
      j["seed"] = seed;
      j["seed_b"] = side_b_seed(seed);
      j["ks_distance"] = u.test.distance;
      j["p_value"] = u.test.p_value;
      j["shuffles"] = u.test.shuffles;
      j["alpha"] = alpha;
      j["universal"] = u.test.p_value > alpha;
      emit(j.dump(2) + "\n", out_path);
    } else if (*rep) {
      std::ifstream in(report_path);
      if (!in) throw InvalidArgument("cannot read " + report_path);
      json report;
      try {
        report = json::parse(in);
      } catch (const json::exception& e) {
        throw InvalidArgument(std::string("report: ") + e.what());
      }
      std::cout << summary_table(report);
      return static_cast<int>(report.value("all_pass", false) ? ExitCode::Ok : ExitCode::TestsFailed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(classify(e));
  }
  return 0;
}
