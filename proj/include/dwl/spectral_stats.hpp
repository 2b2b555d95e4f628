#pragma once

// Empirical statistics of spectral samples and the records that compare them
// with the limiting objects: counting functions, Stieltjes residuals,
// eigenvector sup-norms, bulk gaps, rescaled correlation sums, two-sample
// tests and interlacing.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dwl/bk_oracle.hpp"
#include "dwl/ensemble.hpp"
#include "dwl/error.hpp"
#include "dwl/measure.hpp"
#include "dwl/report.hpp"
#include "dwl/rng.hpp"
#include "dwl/stieltjes.hpp"

namespace dwl {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return std::max(0.0, hi - lo); }
};

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

inline double mean(std::span<const double> v) {
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// Counting and Stieltjes transforms

/// Eigenvalues in the closed interval [lo, hi]; 0 when hi < lo.
inline int count_interval(const SpectralSample& sample, Interval I) {
  if (I.hi < I.lo) return 0;
  const auto& ev = sample.eigenvalues;
  const auto first = std::lower_bound(ev.begin(), ev.end(), I.lo);
  const auto last = std::upper_bound(ev.begin(), ev.end(), I.hi);
  return static_cast<int>(std::max<std::ptrdiff_t>(0, last - first));
}

/// (1/n) sum 1/(lambda_i - z).
inline cplx empirical_stieltjes(const SpectralSample& sample, cplx z) {
  if (!(z.imag() > 0.0)) throw InvalidArgument("empirical_stieltjes requires Im z > 0");
  if (sample.eigenvalues.empty()) throw InvalidArgument("empirical_stieltjes: empty sample");
  cplx s{0.0};
  for (double l : sample.eigenvalues) s += 1.0 / (l - z);
  return s / static_cast<double>(sample.eigenvalues.size());
}

/// |N_I - n int_I rho| / (n |I|) for each sample.
inline std::vector<double> concentration_errors(const std::vector<SpectralSample>& samples,
                                                const DensityProfile& density, Interval I) {
  if (!(I.length() > 0.0)) throw InvalidArgument("concentration: interval must have positive length");
  const double mass = density.integrate(I.lo, I.hi);
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const double n = s.size();
    out.push_back(std::abs(count_interval(s, I) - n * mass) / (n * I.length()));
  }
  return out;
}

/// Mean over intervals and trials of the relative counting error, passing
/// when it is at most `tolerance`. Per-interval means go to the detail.
inline Record concentration_report(const std::vector<SpectralSample>& samples, const DensityProfile& density,
                                   const std::vector<Interval>& intervals, double tolerance = 0.05,
                                   const json& provenance = json::object()) {
  if (samples.empty()) throw InvalidArgument("concentration_report: no samples");
  if (intervals.empty()) throw InvalidArgument("concentration_report: no intervals");
  std::vector<double> all;
  json per = json::array();
  json ivs = json::array();
  for (const auto& I : intervals) {
    const auto errs = concentration_errors(samples, density, I);
    all.insert(all.end(), errs.begin(), errs.end());
    per.push_back({{"interval", {I.lo, I.hi}},
                   {"mean_relative_error", number(mean(errs))},
                   {"max_relative_error", number(*std::max_element(errs.begin(), errs.end()))},
                   {"expected_fraction", number(density.integrate(I.lo, I.hi))}});
    ivs.push_back({I.lo, I.hi});
  }
  json params{{"n", samples.front().size()}, {"trials", samples.size()}, {"intervals", ivs}};
  auto r = make_record("concentration", params, mean(all), 0.0, tolerance, Compare::AtMost, provenance);
  r.detail["max_relative_error"] = number(*std::max_element(all.begin(), all.end()));
  r.detail["per_interval"] = per;
  return r;
}

/// Largest fraction N_I / n over trials for an interval inside a spectral gap.
inline Record gap_occupancy(const std::vector<SpectralSample>& samples, Interval I, double max_fraction = 0.01,
                            const json& provenance = json::object()) {
  if (samples.empty()) throw InvalidArgument("gap_occupancy: no samples");
  double worst = 0.0, total = 0.0;
  for (const auto& s : samples) {
    const double f = static_cast<double>(count_interval(s, I)) / s.size();
    worst = std::max(worst, f);
    total += f;
  }
  json params{{"n", samples.front().size()}, {"trials", samples.size()}, {"interval", {I.lo, I.hi}}};
  auto r = make_record("gap_occupancy", params, worst, 0.0, max_fraction, Compare::AtMost, provenance);
  r.detail["mean_fraction"] = number(total / samples.size());
  return r;
}

/// |m_n(z) - g(z + m_n(z))| with g the Stieltjes transform of `measure`.
inline double empirical_pastur_residual(const SpectralSample& sample, const AtomicMeasure& measure, cplx z) {
  const cplx m = empirical_stieltjes(sample, z);
  return std::abs(m - atom_transform(measure, z + m));
}

/// Median over trials of the largest residual over `zgrid`. The fitted
/// constant c = residual * log n is reported alongside.
inline Record pastur_residual(const std::vector<SpectralSample>& samples, const AtomicMeasure& measure,
                              const std::vector<cplx>& zgrid, double tolerance = 0.1,
                              const json& provenance = json::object()) {
  if (samples.empty() || zgrid.empty()) throw InvalidArgument("pastur_residual: no samples or empty grid");
  std::vector<double> worst;
  for (const auto& s : samples) {
    double w = 0.0;
    for (const auto& z : zgrid) w = std::max(w, empirical_pastur_residual(s, measure, z));
    worst.push_back(w);
  }
  const double n = samples.front().size();
  const double med = median(worst);
  json params{{"n", samples.front().size()}, {"trials", samples.size()}, {"grid_points", zgrid.size()},
              {"min_imag", std::min_element(zgrid.begin(), zgrid.end(), [](cplx a, cplx b) {
                             return a.imag() < b.imag();
                           })->imag()}};
  auto r = make_record("pastur_residual", params, med, 0.0, tolerance, Compare::AtMost, provenance);
  r.detail["fitted_constant"] = number(med * std::log(n));
  r.detail["max_over_trials"] = number(*std::max_element(worst.begin(), worst.end()));
  return r;
}

// ---------------------------------------------------------------------------
// Delocalization

struct DelocalizationTrial {
  double normalized_max = 0.0;  // max_i |u_i|_inf sqrt(n) / log^2 n
  double median_sup = 0.0;      // median_i |u_i|_inf
  double max_sup = 0.0;         // max_i |u_i|_inf
};

inline DelocalizationTrial delocalization_trial(const SpectralSample& sample, const std::vector<int>& indices) {
  if (!sample.eigenvectors) throw InvalidArgument("delocalization: sample carries no eigenvectors");
  if (indices.empty()) throw InvalidArgument("delocalization: empty index set");
  const auto& v = *sample.eigenvectors;
  const double n = sample.size();
  std::vector<double> sups;
  sups.reserve(indices.size());
  for (int i : indices) {
    if (i < 1 || i > sample.size()) throw InvalidArgument("delocalization: index out of range");
    sups.push_back(v.col(i - 1).cwiseAbs().maxCoeff());
  }
  DelocalizationTrial t;
  t.max_sup = *std::max_element(sups.begin(), sups.end());
  t.median_sup = median(sups);
  const double logn = std::log(n);
  t.normalized_max = t.max_sup * std::sqrt(n) / (logn * logn);
  return t;
}

/// Median over trials of max_i |u_i|_inf sqrt(n) / log^2 n on bulk indices,
/// passing when it is at most `bound`.
inline Record delocalization_stats(const std::vector<DelocalizationTrial>& trials, int n, const BulkIndexSet& bulk,
                                   double bound = 10.0, const json& provenance = json::object()) {
  if (trials.empty()) throw InvalidArgument("delocalization_stats: no trials");
  std::vector<double> stat, med_sup;
  for (const auto& t : trials) {
    stat.push_back(t.normalized_max);
    med_sup.push_back(t.median_sup);
  }
  json params{{"n", n}, {"trials", trials.size()}, {"epsilon", bulk.epsilon}, {"bulk_vectors", bulk.indices().size()}};
  auto r = make_record("delocalization", params, median(stat), 0.0, bound, Compare::AtMost, provenance);
  r.detail["max_over_trials"] = number(*std::max_element(stat.begin(), stat.end()));
  r.detail["median_sup_norm"] = number(median(med_sup));
  return r;
}

inline Record delocalization_stats(const std::vector<SpectralSample>& samples, const BulkIndexSet& bulk,
                                   double bound = 10.0, const json& provenance = json::object()) {
  if (samples.empty()) throw InvalidArgument("delocalization_stats: no samples");
  const auto indices = bulk.indices();
  std::vector<DelocalizationTrial> trials;
  for (const auto& s : samples) trials.push_back(delocalization_trial(s, indices));
  return delocalization_stats(trials, samples.front().size(), bulk, bound, provenance);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares y = intercept + slope x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_line: need at least two matching points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_line: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  return f;
}

/// Slope of log(median sup-norm) against log n; passes inside [lo, hi].
inline Record delocalization_scaling(const std::vector<int>& ns, const std::vector<double>& median_sup,
                                     double lo = -0.55, double hi = -0.40, const json& provenance = json::object()) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    lx.push_back(std::log(static_cast<double>(ns[i])));
    ly.push_back(std::log(median_sup.at(i)));
  }
  const auto fit = fit_line(lx, ly);
  auto r = make_record("delocalization_scaling", json{{"n", ns}}, fit.slope, lo, hi, Compare::InRange, provenance);
  r.detail["median_sup_norm"] = json::array();
  for (double m : median_sup) r.detail["median_sup_norm"].push_back(number(m));
  r.detail["r_squared"] = number(fit.r_squared);
  return r;
}

// ---------------------------------------------------------------------------
// Gaps on the A_n = n W scale

/// n (lambda_{i+1} - lambda_i) for consecutive bulk indices i, i + 1.
inline std::vector<double> bulk_gaps(const SpectralSample& sample, const BulkIndexSet& bulk) {
  const int n = sample.size();
  if (bulk.n != n) throw InvalidArgument("bulk_gaps: bulk set built for a different n");
  std::vector<double> gaps;
  for (const auto& r : bulk.ranges)
    for (int i = r.lo; i < r.hi; ++i)
      gaps.push_back(n * (sample.eigenvalues[static_cast<std::size_t>(i)] -
                          sample.eigenvalues[static_cast<std::size_t>(i - 1)]));
  return gaps;
}

/// Frequency over trials and bulk indices of A_n-scale gaps at most n^-c0.
inline Record gap_stats(const std::vector<SpectralSample>& samples, const BulkIndexSet& bulk, double c0,
                        double max_frequency = 0.01, const json& provenance = json::object()) {
  if (!(c0 >= 0.0)) throw InvalidArgument("gap_stats: c0 must be nonnegative");
  if (samples.empty()) throw InvalidArgument("gap_stats: no samples");
  const double n = samples.front().size();
  const double threshold = std::pow(n, -c0);
  std::size_t small = 0, total = 0;
  std::vector<double> min_gaps;
  for (const auto& s : samples) {
    const auto gaps = bulk_gaps(s, bulk);
    if (gaps.empty()) continue;
    total += gaps.size();
    small += static_cast<std::size_t>(std::count_if(gaps.begin(), gaps.end(), [&](double g) { return g <= threshold; }));
    min_gaps.push_back(*std::min_element(gaps.begin(), gaps.end()));
  }
  if (total == 0) throw InvalidArgument("gap_stats: bulk index set has no consecutive pairs");
  const double freq = static_cast<double>(small) / static_cast<double>(total);
  json params{{"n", samples.front().size()}, {"trials", samples.size()}, {"epsilon", bulk.epsilon}, {"c0", c0}};
  auto r = make_record("gap_frequency", params, freq, 0.0, max_frequency, Compare::AtMost, provenance);
  r.detail["threshold"] = number(threshold);
  r.detail["gaps"] = total;
  r.detail["small_gaps"] = small;
  r.detail["median_min_gap"] = number(median(min_gaps));
  r.detail["smallest_gap"] = number(*std::min_element(min_gaps.begin(), min_gaps.end()));
  return r;
}

// ---------------------------------------------------------------------------
// Rescaled clouds and correlation sums

struct RescaledCloud {
  double x0 = 0.0;
  double scale = 0.0;  // n rho(x0)
  double window = 0.0;
  std::vector<double> points;  // (lambda - x0) n rho(x0), |u| <= window
};

inline constexpr double kMinRescaleDensity = 1e-6;

inline RescaledCloud rescale_at(const SpectralSample& sample, double x0, const DensityProfile& density,
                                double window = 20.0) {
  const double rho = density.at(x0);
  if (!(rho > kMinRescaleDensity))
    throw InvalidArgument("rescale_at: density at x0 = " + std::to_string(x0) + " is " + std::to_string(rho) +
                          ", not inside the support");
  if (window < 0.0) throw InvalidArgument("rescale_at: window must be nonnegative");
  RescaledCloud c;
  c.x0 = x0;
  c.scale = sample.size() * rho;
  c.window = window;
  const double half = window / c.scale;
  const auto& ev = sample.eigenvalues;
  for (auto it = std::lower_bound(ev.begin(), ev.end(), x0 - half); it != ev.end() && *it <= x0 + half; ++it) {
    const double u = (*it - x0) * c.scale;
    if (std::abs(u) <= window) c.points.push_back(u);
  }
  return c;
}

inline std::vector<RescaledCloud> rescale_at(const std::vector<SpectralSample>& samples, double x0,
                                             const DensityProfile& density, double window = 20.0) {
  std::vector<RescaledCloud> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(rescale_at(s, x0, density, window));
  return out;
}

/// Test function on R^k vanishing outside [-radius, radius]^k.
struct TestFunction {
  int k = 1;
  double radius = 1.0;
  std::function<double(std::span<const double>)> f;
  std::string name;

  double operator()(std::span<const double> u) const { return f(u); }
};

/// exp(1 - 1/(1 - t^2)) on |t| < 1, peak 1 at the origin.
inline double bump(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

inline TestFunction bump_function(double radius) {
  return {1, radius, [radius](std::span<const double> u) { return bump(u[0] / radius); },
          "bump(u/" + std::to_string(radius) + ")"};
}

/// g(u) g(v) with g the bump of the given radius.
inline TestFunction separable_pair_function(double radius) {
  return {2, radius, [radius](std::span<const double> u) { return bump(u[0] / radius) * bump(u[1] / radius); },
          "bump(u/R)bump(v/R)"};
}

/// g(u) g(v) h((u - v)/width): pairs closer than `width`.
inline TestFunction near_diagonal_function(double radius, double width) {
  return {2, radius,
          [radius, width](std::span<const double> u) {
            return bump(u[0] / radius) * bump(u[1] / radius) * bump((u[0] - u[1]) / width);
          },
          "bump(u/R)bump(v/R)bump((u-v)/w)"};
}

struct CorrelationEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

/// Average over clouds of the sum of f over ordered tuples of distinct points.
inline CorrelationEstimate correlation_statistic(const std::vector<RescaledCloud>& clouds, const TestFunction& f) {
  if (f.k != 1 && f.k != 2) throw InvalidArgument("correlation_statistic: k must be 1 or 2");
  if (clouds.empty()) throw InvalidArgument("correlation_statistic: no clouds");
  std::vector<double> per;
  per.reserve(clouds.size());
  for (const auto& c : clouds) {
    if (c.window < f.radius)
      throw InvalidArgument("correlation_statistic: window " + std::to_string(c.window) +
                            " is smaller than the test function support " + std::to_string(f.radius));
    double s = 0.0;
    const auto& p = c.points;
    if (f.k == 1) {
      for (double u : p) s += f(std::span<const double>(&u, 1));
    } else {
      for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j) {
          if (i == j) continue;
          const double uv[2] = {p[i], p[j]};
          s += f(uv);
        }
    }
    per.push_back(s);
  }
  CorrelationEstimate e;
  e.trials = per.size();
  e.mean = mean(per);
  if (per.size() > 1) {
    double ss = 0.0;
    for (double v : per) ss += (v - e.mean) * (v - e.mean);
    e.std_error = std::sqrt(ss / static_cast<double>(per.size() - 1) / static_cast<double>(per.size()));
  }
  return e;
}

enum class ReferenceProcess { Sine, Poisson };

/// Composite Simpson quadrature of f against the k-point function of the
/// limiting process on [-radius, radius]^k: det(K(u_i, u_j)) for the sine
/// process, 1 for a unit-intensity Poisson process.
inline double correlation_reference(const TestFunction& f, ReferenceProcess process = ReferenceProcess::Sine,
                                    int panels = 800) {
  if (panels % 2 != 0) ++panels;
  const double h = 2.0 * f.radius / panels;
  auto weight = [&](int i) { return (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  auto node = [&](int i) { return -f.radius + h * i; };
  if (f.k == 1) {
    double s = 0.0;
    for (int i = 0; i <= panels; ++i) {
      const double u = node(i);
      s += weight(i) * f(std::span<const double>(&u, 1));
    }
    return s * h / 3.0;
  }
  if (f.k != 2) throw InvalidArgument("correlation_reference: k must be 1 or 2");
  double s = 0.0;
  for (int i = 0; i <= panels; ++i) {
    for (int j = 0; j <= panels; ++j) {
      const double uv[2] = {node(i), node(j)};
      const double val = f(uv);
      if (val == 0.0) continue;
      const double rho2 = process == ReferenceProcess::Sine ? sine_correlation(uv) : 1.0;
      s += weight(i) * weight(j) * val * rho2;
    }
  }
  return s * h * h / 9.0;
}

// ---------------------------------------------------------------------------
// Two-sample comparison

/// n (lambda_{i+1} - lambda_i) at a fixed 1-based index i.
inline double bulk_gap_statistic(const SpectralSample& sample, int index) {
  if (index < 1 || index >= sample.size()) throw InvalidArgument("bulk_gap_statistic: index out of range");
  const auto i = static_cast<std::size_t>(index);
  return sample.size() * (sample.eigenvalues[i] - sample.eigenvalues[i - 1]);
}

/// Two-sample Kolmogorov-Smirnov distance sup_x |F_a(x) - F_b(x)|.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = a.size(), nb = b.size();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

struct TwoSampleResult {
  double distance = 0.0;
  double p_value = 1.0;
  int shuffles = 0;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
};

inline constexpr std::size_t kMinTwoSampleSize = 100;
inline constexpr int kMinShuffles = 1000;

/// KS distance and permutation p-value (1 + #{D_perm >= D}) / (1 + shuffles).
/// The shuffles use a Fisher-Yates pass driven by the counter stream, so the
/// p-value does not depend on the standard library.
inline TwoSampleResult two_sample_distance(const std::vector<double>& a, const std::vector<double>& b,
                                           int shuffles = kMinShuffles, std::uint64_t seed = 0) {
  if (a.size() < kMinTwoSampleSize || b.size() < kMinTwoSampleSize)
    throw InvalidArgument("two_sample_distance: need at least " + std::to_string(kMinTwoSampleSize) +
                          " samples per side, got " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  if (shuffles < kMinShuffles) throw InvalidArgument("two_sample_distance: need at least 1000 shuffles");
  TwoSampleResult r;
  r.size_a = a.size();
  r.size_b = b.size();
  r.shuffles = shuffles;
  r.distance = ks_distance(a, b);
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  CounterStream stream(seed, 0x6b73u);
  int exceed = 0;
  const auto split = static_cast<std::ptrdiff_t>(a.size());
  for (int s = 0; s < shuffles; ++s) {
    for (std::size_t i = pooled.size() - 1; i > 0; --i)
      std::swap(pooled[i], pooled[stream.below(static_cast<std::uint32_t>(i + 1))]);
    const double d = ks_distance({pooled.begin(), pooled.begin() + split}, {pooled.begin() + split, pooled.end()});
    if (d >= r.distance - 1e-12) ++exceed;
  }
  r.p_value = (1.0 + exceed) / (1.0 + shuffles);
  return r;
}

// ---------------------------------------------------------------------------
// Interlacing

inline constexpr double kInterlacingTolerance = 1e-10;

/// lambda_i(minor) in [lambda_i(full), lambda_{i+1}(full)] for every i.
inline bool interlacing_check(const SpectralSample& full, const SpectralSample& minor,
                              double tol = kInterlacingTolerance) {
  if (minor.size() + 1 != full.size())
    throw InvalidArgument("interlacing_check: minor has size " + std::to_string(minor.size()) + ", full has " +
                          std::to_string(full.size()));
  const auto& a = full.eigenvalues;
  const auto& m = minor.eigenvalues;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double scale = tol * std::max(1.0, std::abs(m[i]));
    if (m[i] < a[i] - scale || m[i] > a[i + 1] + scale) return false;
  }
  return true;
}

struct InterlacingIdentity {
  double max_relative_error = 0.0;
  std::vector<double> relative_errors;  // per eigenvalue of the full matrix
};

/// Double uses the LAPACK backend. Extended recomputes both spectra in long
/// double with Eigen; needed when a minor eigenvalue sits within ~1e-10 of
/// a full eigenvalue, where the sum loses digits in proportion to 1/gap.
enum class Precision { Double, Extended };

namespace detail {

template <class Real, class Values, class Vectors>
InterlacingIdentity interlacing_sum(const HermitianMatrix& w, int k, const Values& full, const Values& mu,
                                    const Vectors& u) {
  using C = std::complex<Real>;
  const int n = w.size();
  Eigen::Matrix<C, Eigen::Dynamic, 1> x(n - 1);
  for (int i = 0, r = 0; i < n; ++i)
    if (i != k) x(r++) = C(w(i, k));
  const Eigen::Matrix<C, Eigen::Dynamic, 1> proj = u.adjoint() * x;
  const Real akk = w(k, k).real();
  InterlacingIdentity out;
  for (int i = 0; i < n; ++i) {
    const Real lambda = full[i];
    Real lhs = 0;
    for (int j = 0; j < n - 1; ++j) lhs += std::norm(proj(j)) / (mu[j] - lambda);
    const Real rhs = akk - lambda;
    const double err = static_cast<double>(std::abs(lhs - rhs) / (std::abs(rhs) + std::abs(akk) + std::abs(lambda)));
    out.relative_errors.push_back(err);
    out.max_relative_error = std::max(out.max_relative_error, err);
  }
  return out;
}

}  // namespace detail

/// For A with row/column k removed giving A', eigenpairs (mu_j, u_j) of A'
/// and X the removed column without its diagonal entry, checks
///   sum_j |u_j^* X|^2 / (mu_j - lambda_i) = a_kk - lambda_i
/// for every eigenvalue lambda_i of A. The error is scaled by
/// |rhs| + |a_kk| + |lambda_i|.
inline InterlacingIdentity interlacing_identity(const HermitianMatrix& w, int drop_index,
                                                Precision precision = Precision::Double) {
  const int n = w.size();
  if (n < 2) throw InvalidArgument("interlacing_identity: need n >= 2");
  const auto minor_matrix = principal_minor(w, drop_index);
  if (precision == Precision::Double) {
    const auto full = eigendecompose(w, false);
    const auto minor = eigendecompose(minor_matrix, true);
    return detail::interlacing_sum<double>(w, drop_index - 1, full.eigenvalues, minor.eigenvalues,
                                           *minor.eigenvectors);
  }
  using CL = std::complex<long double>;
  using ML = Eigen::Matrix<CL, Eigen::Dynamic, Eigen::Dynamic>;
  const ML a = w.to_complex().cast<CL>();
  const ML m = minor_matrix.to_complex().cast<CL>();
  Eigen::SelfAdjointEigenSolver<ML> full(a, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<ML> minor(m, Eigen::ComputeEigenvectors);
  if (full.info() != Eigen::Success || minor.info() != Eigen::Success)
    throw BackendError("interlacing_identity: extended-precision eigensolver did not converge");
  return detail::interlacing_sum<long double>(w, drop_index - 1, full.eigenvalues(), minor.eigenvalues(),
                                              minor.eigenvectors());
}

}  // namespace dwl
