#pragma once

// Limiting spectral law of W = M / sqrt(n) + D.
//
// Its Stieltjes transform m(z) solves the self-consistent equation
//
//     m = sum_i p_i / (a_i - z - m),        Im z > 0,
//
// and has a unique solution in the upper half-plane. Two solvers are
// provided and cross-checked against each other:
//
//   * damped Newton on F(m) = m - g(z + m), continued in Im z from far above
//     the real axis down to the target;
//   * the equivalent degree-(l + 1) polynomial obtained by clearing
//     denominators, solved through its companion matrix, with the root that
//     continues the previous branch selected at every continuation step.
//
// The density follows by Stieltjes inversion, rho(x) = lim Im m(x + i eta) / pi,
// which is evaluated at three heights and Richardson-extrapolated to eta = 0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dwl/error.hpp"
#include "dwl/measure.hpp"
#include "dwl/polynomial.hpp"
#include "dwl/rng.hpp"

namespace dwl {

inline constexpr double kResidualTolerance = 1e-12;

enum class SolveStrategy { Newton, Polynomial };

struct StieltjesSolution {
  cplx z;
  cplx m;
  double residual = 0.0;
  int branch_id = -1;  // root index of the last polynomial solve, -1 for Newton
  SolveStrategy strategy = SolveStrategy::Newton;
};

/// |m - sum_i p_i / (a_i - z - m)|
inline double pastur_residual(const AtomicMeasure& measure, cplx z, cplx m) {
  return std::abs(m - atom_transform(measure, z + m));
}

/// Stieltjes transform of the semicircle law: m^2 + z m + 1 = 0, Im m > 0.
inline cplx semicircle_st(cplx z) {
  const cplx disc = std::sqrt(z * z - 4.0);
  // Take the root of larger modulus first and recover the other from the
  // product of the roots (= 1) to avoid cancellation at large |z|.
  const cplx r1 = (-z + disc) / 2.0;
  const cplx r2 = (-z - disc) / 2.0;
  const cplx big = std::abs(r1) >= std::abs(r2) ? r1 : r2;
  const cplx small = 1.0 / big;
  return big.imag() > small.imag() ? big : small;
}

/// The polynomial P(m) = m prod_i (a_i - z - m) - sum_i p_i prod_{j != i} (a_j - z - m),
/// whose roots away from the poles are exactly the solutions of the
/// self-consistent equation.
inline Polynomial pastur_polynomial(const AtomicMeasure& measure, cplx z) {
  const auto& atoms = measure.atoms();
  // a_i - z - m as a polynomial in m.
  std::vector<Polynomial> factors;
  factors.reserve(atoms.size());
  for (const auto& a : atoms) factors.emplace_back(std::vector<cplx>{a.location - z, cplx{-1.0}});

  Polynomial all({cplx{1.0}});
  for (const auto& f : factors) all = all * f;
  Polynomial lhs = Polynomial({cplx{0.0}, cplx{1.0}}) * all;

  Polynomial rhs;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    Polynomial others({cplx{atoms[i].weight}});
    for (std::size_t j = 0; j < atoms.size(); ++j)
      if (j != i) others = others * factors[j];
    rhs = rhs + others;
  }
  return lhs - rhs;
}

namespace detail {

struct NewtonResult {
  cplx m;
  double residual;
  bool converged;
};

/// Damped Newton on F(m) = m - g(z + m). Steps are halved until |F| decreases
/// and Im m stays nonnegative.
inline NewtonResult damped_newton(const AtomicMeasure& measure, cplx z, cplx m, int max_iter = 60) {
  auto eval = [&](cplx mm, cplx* deriv) {
    cplx g{0.0}, dg{0.0};
    for (const auto& a : measure.atoms()) {
      const cplx inv = 1.0 / (a.location - z - mm);
      g += a.weight * inv;
      dg += a.weight * inv * inv;
    }
    if (deriv) *deriv = 1.0 - dg;
    return mm - g;
  };
  cplx deriv;
  cplx f = eval(m, &deriv);
  double res = std::abs(f);
  for (int iter = 0; iter < max_iter; ++iter) {
    if (res <= 1e-15 * (1.0 + std::abs(m))) return {m, res, true};
    if (deriv == cplx{0.0}) return {m, res, false};
    const cplx step = -f / deriv;
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      const cplx trial = m + t * step;
      if (trial.imag() < 0.0) continue;
      cplx d2;
      const cplx f2 = eval(trial, &d2);
      const double r2 = std::abs(f2);
      if (r2 < res || (r2 <= res * (1.0 + 1e-12) && t * std::abs(step) <= 1e-15 * (1.0 + std::abs(m)))) {
        m = trial;
        f = f2;
        deriv = d2;
        res = r2;
        accepted = true;
        break;
      }
    }
    if (!accepted) return {m, res, res <= 1e-13 * (1.0 + std::abs(m))};
  }
  return {m, res, res <= 1e-13 * (1.0 + std::abs(m))};
}

/// Heights from eta_0 = 2 (1 + max|a_i| + |z|) halving down to and ending at
/// `eta_target`.
inline std::vector<double> continuation_heights(const AtomicMeasure& measure, cplx z, double eta_target) {
  const double eta0 = 2.0 * (1.0 + measure.max_abs_location() + std::abs(z));
  std::vector<double> heights;
  for (double eta = eta0; eta > eta_target; eta *= 0.5) heights.push_back(eta);
  heights.push_back(eta_target);
  return heights;
}

/// Largest branch move that a continuous Herglotz solution can make when
/// Im z decreases from eta_prev to eta: |m'| <= Im m / Im z, slack factor 10.
inline double allowed_jump(double eta_prev, double eta, cplx m_prev, cplx m) {
  const double slope = std::max({1.0, m_prev.imag() / eta, m.imag() / eta});
  return 10.0 * (eta_prev - eta) * slope + 1e-12;
}

inline cplx polish(const AtomicMeasure& measure, cplx z, cplx m) {
  const auto r = damped_newton(measure, z, m, 8);
  return r.residual <= pastur_residual(measure, z, m) ? r.m : m;
}

struct PathPoint {
  double eta;
  cplx m;
  int branch_id;
};

inline std::optional<std::vector<PathPoint>> newton_path(const AtomicMeasure& measure, double x,
                                                         const std::vector<double>& heights) {
  std::vector<PathPoint> path;
  path.reserve(heights.size());
  cplx m = -1.0 / cplx{x, heights.front()};
  double eta_prev = heights.front();
  for (double eta : heights) {
    const cplx z{x, eta};
    const auto r = damped_newton(measure, z, m);
    if (!r.converged || r.m.imag() < 0.0) return std::nullopt;
    if (!path.empty() && std::abs(r.m - m) > allowed_jump(eta_prev, eta, m, r.m)) return std::nullopt;
    m = r.m;
    eta_prev = eta;
    path.push_back({eta, m, -1});
  }
  return path;
}

inline std::vector<PathPoint> polynomial_path(const AtomicMeasure& measure, double x,
                                              const std::vector<double>& heights) {
  std::vector<PathPoint> path;
  path.reserve(heights.size());
  cplx m = -1.0 / cplx{x, heights.front()};
  for (double eta : heights) {
    const cplx z{x, eta};
    const auto roots = polynomial_roots(pastur_polynomial(measure, z));
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < roots.size(); ++k) {
      // Roundoff can push the physical root slightly below the axis.
      if (roots[k].imag() < -1e-9 * (1.0 + std::abs(roots[k]))) continue;
      const double d = std::abs(roots[k] - m);
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(k);
      }
    }
    if (best < 0) throw SolverError("no root with Im m >= 0 at z = " + std::to_string(x) + "+i" +
                                        std::to_string(eta), std::numeric_limits<double>::infinity());
    cplx chosen = polish(measure, z, roots[static_cast<std::size_t>(best)]);
    if (chosen.imag() < 0.0) chosen.imag(0.0);
    m = chosen;
    path.push_back({eta, m, best});
  }
  return path;
}

inline StieltjesSolution finish(const AtomicMeasure& measure, cplx z, const PathPoint& p, SolveStrategy s) {
  StieltjesSolution sol{z, p.m, pastur_residual(measure, z, p.m), p.branch_id, s};
  return sol;
}

}  // namespace detail

/// Damped Newton with continuation only; throws SolverError when the path
/// breaks (non-convergence, a jump between branches, or Im m < 0).
inline StieltjesSolution solve_pastur_newton(const AtomicMeasure& measure, cplx z) {
  if (!(z.imag() > 0.0)) throw InvalidArgument("solve_pastur requires Im z > 0");
  const auto heights = detail::continuation_heights(measure, z, z.imag());
  const auto path = detail::newton_path(measure, z.real(), heights);
  if (!path) throw SolverError("Newton continuation failed", std::numeric_limits<double>::infinity());
  return detail::finish(measure, z, path->back(), SolveStrategy::Newton);
}

/// Companion-matrix root tracking only.
inline StieltjesSolution solve_pastur_polynomial(const AtomicMeasure& measure, cplx z) {
  if (!(z.imag() > 0.0)) throw InvalidArgument("solve_pastur requires Im z > 0");
  const auto heights = detail::continuation_heights(measure, z, z.imag());
  const auto path = detail::polynomial_path(measure, z.real(), heights);
  return detail::finish(measure, z, path.back(), SolveStrategy::Polynomial);
}

/// Solutions at each requested height (strictly decreasing, all > 0) along
/// the vertical line Re z = x. Uses Newton and falls back to the polynomial
/// tracker if the Newton path breaks. Every returned point satisfies the
/// residual tolerance or SolverError is thrown.
inline std::vector<StieltjesSolution> solve_pastur_heights(const AtomicMeasure& measure, double x,
                                                           const std::vector<double>& targets) {
  if (targets.empty()) return {};
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(targets[i] > 0.0)) throw InvalidArgument("solve_pastur requires Im z > 0");
    if (i > 0 && !(targets[i] < targets[i - 1]))
      throw InvalidArgument("continuation heights must be strictly decreasing");
  }
  auto heights = detail::continuation_heights(measure, cplx{x, targets.front()}, targets.front());
  heights.pop_back();
  std::vector<std::size_t> marks;
  for (double t : targets) {
    marks.push_back(heights.size());
    heights.push_back(t);
  }
  // Heights between consecutive targets follow the same halving rule.
  std::vector<double> merged;
  std::vector<std::size_t> target_index;
  for (std::size_t i = 0; i < heights.size(); ++i) {
    if (!merged.empty()) {
      for (double eta = merged.back() * 0.5; eta > heights[i]; eta *= 0.5) merged.push_back(eta);
    }
    merged.push_back(heights[i]);
    if (std::find(marks.begin(), marks.end(), i) != marks.end()) target_index.push_back(merged.size() - 1);
  }

  SolveStrategy strategy = SolveStrategy::Newton;
  std::vector<detail::PathPoint> path;
  if (auto newton = detail::newton_path(measure, x, merged)) {
    path = std::move(*newton);
  } else {
    strategy = SolveStrategy::Polynomial;
    path = detail::polynomial_path(measure, x, merged);
  }

  std::vector<StieltjesSolution> out;
  out.reserve(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const auto& p = path[target_index[k]];
    auto sol = detail::finish(measure, cplx{x, p.eta}, p, strategy);
    if (sol.residual > kResidualTolerance) {
      // Newton converged to a loose tolerance; retry this point with the tracker.
      const auto alt = solve_pastur_polynomial(measure, sol.z);
      if (alt.residual < sol.residual) sol = alt;
    }
    if (sol.residual > kResidualTolerance || sol.m.imag() < 0.0)
      throw SolverError("Pastur solve did not reach tolerance at z = " + std::to_string(x) + "+i" +
                            std::to_string(p.eta),
                        sol.residual);
    out.push_back(sol);
  }
  return out;
}

/// The unique solution with Im m >= 0, reached by continuation from far above
/// the real axis. Residual <= 1e-12 or SolverError.
inline StieltjesSolution solve_pastur(const AtomicMeasure& measure, cplx z) {
  if (!(z.imag() > 0.0)) throw InvalidArgument("solve_pastur requires Im z > 0");
  return solve_pastur_heights(measure, z.real(), {z.imag()}).front();
}

/// Plain damped Newton from a caller-chosen start, without continuation.
inline StieltjesSolution newton_from(const AtomicMeasure& measure, cplx z, cplx m_start) {
  const auto r = detail::damped_newton(measure, z, m_start, 200);
  return {z, r.m, pastur_residual(measure, z, r.m), -1, SolveStrategy::Newton};
}

// ---------------------------------------------------------------------------
// Density

struct DensityProfile {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> eta_schedule;  // {4 eta_f, 2 eta_f, eta_f}
  AtomicMeasure measure;
  double eta_floor;

  /// Trapezoid integral over the whole grid.
  double total_mass() const {
    double s = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
      s += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
    return s;
  }

  /// Piecewise-linear interpolation; zero outside the grid.
  double at(double x) const {
    if (grid.empty() || x < grid.front() || x > grid.back()) return 0.0;
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    if (it == grid.end()) return values.back();
    const std::size_t i = static_cast<std::size_t>(it - grid.begin());
    const double t = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return (1.0 - t) * values[i - 1] + t * values[i];
  }

  /// Trapezoid integral of the interpolant over [lo, hi].
  double integrate(double lo, double hi) const {
    if (hi <= lo || grid.empty()) return 0.0;
    lo = std::max(lo, grid.front());
    hi = std::min(hi, grid.back());
    if (hi <= lo) return 0.0;
    double s = 0.0;
    double x_prev = lo, y_prev = at(lo);
    auto it = std::upper_bound(grid.begin(), grid.end(), lo);
    for (; it != grid.end() && *it < hi; ++it) {
      const double y = values[static_cast<std::size_t>(it - grid.begin())];
      s += 0.5 * (y + y_prev) * (*it - x_prev);
      x_prev = *it;
      y_prev = y;
    }
    s += 0.5 * (at(hi) + y_prev) * (hi - x_prev);
    return s;
  }
};

inline std::vector<double> make_grid(double lo, double hi, int count) {
  if (count < 2 || !(hi > lo)) throw InvalidArgument("grid needs hi > lo and at least two points");
  std::vector<double> g(static_cast<std::size_t>(count));
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = lo + i * step;
  g.back() = hi;
  return g;
}

inline std::vector<double> eta_schedule(double eta_floor) {
  return {4.0 * eta_floor, 2.0 * eta_floor, eta_floor};
}

/// Extrapolated density at a single point: Im m / pi at {4, 2, 1} eta_f,
/// combined assuming an error expansion in powers of eta.
inline double density_at(const AtomicMeasure& measure, double x, double eta_floor) {
  const auto sols = solve_pastur_heights(measure, x, eta_schedule(eta_floor));
  const double f4 = sols[0].m.imag() / std::numbers::pi;
  const double f2 = sols[1].m.imag() / std::numbers::pi;
  const double f1 = sols[2].m.imag() / std::numbers::pi;
  return std::max(0.0, (8.0 * f1 - 6.0 * f2 + f4) / 3.0);
}

inline DensityProfile density(const AtomicMeasure& measure, const std::vector<double>& grid,
                              double eta_floor = 1e-6) {
  if (!(eta_floor > 0.0 && eta_floor <= 1e-3)) throw InvalidArgument("eta_floor must lie in (0, 1e-3]");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw InvalidArgument("density grid must be strictly increasing");
  DensityProfile profile{grid, std::vector<double>(grid.size()), eta_schedule(eta_floor), measure, eta_floor};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      profile.values[i] = density_at(measure, grid[i], eta_floor);
    } catch (const SolverError& e) {
      throw SolverError("density: grid point " + std::to_string(i) + " (x = " + std::to_string(grid[i]) +
                            "): " + e.what(),
                        e.last_residual());
    }
  }
  return profile;
}

// ---------------------------------------------------------------------------
// Support and quantiles

struct SupportInterval {
  double lo;
  double hi;
};

struct SupportProfile {
  std::vector<SupportInterval> intervals;
  std::vector<double> quantiles;  // s_0 = 0, s_1, ..., s_q
  bool condition_a = true;        // false if rho vanishes inside an interval
  std::vector<double> interior_zeros;

  std::size_t count() const { return intervals.size(); }
};

namespace detail {

/// Bisection for the crossing of rho = threshold between an inside point and
/// an outside point, to the requested location accuracy.
inline double refine_edge(const AtomicMeasure& measure, double inside, double outside, double threshold,
                          double eta_floor, double tol) {
  while (std::abs(inside - outside) > tol) {
    const double mid = 0.5 * (inside + outside);
    if (density_at(measure, mid, eta_floor) > threshold)
      inside = mid;
    else
      outside = mid;
  }
  return 0.5 * (inside + outside);
}

inline double im_m(const AtomicMeasure& measure, double x, double eta) {
  return solve_pastur(measure, cplx{x, eta}).m.imag();
}

/// True if the density has a zero near the local minimum bracketed by
/// [lo, hi]: the minimum is located at small eta, and the test is whether Im m
/// keeps shrinking as eta -> 0 (a positive density converges instead).
inline std::optional<double> interior_zero(const AtomicMeasure& measure, double lo, double hi) {
  const double probe_eta = 1e-9;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = im_m(measure, c, probe_eta), fd = im_m(measure, d, probe_eta);
  for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = im_m(measure, c, probe_eta);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = im_m(measure, d, probe_eta);
    }
  }
  const double x = 0.5 * (a + b);
  const double coarse = im_m(measure, x, 1e-4);
  const double fine = im_m(measure, x, 1e-8);
  if (fine < 0.1 * coarse) return x;
  return std::nullopt;
}

}  // namespace detail

/// Support intervals of the profile: maximal grid runs with rho > threshold,
/// edges refined by bisection to 1e-8, quantiles by trapezoid integration
/// with doubled resolution within 0.05 of every edge.
inline SupportProfile support_intervals(const DensityProfile& profile, double threshold = 1e-7) {
  const auto& x = profile.grid;
  const auto& rho = profile.values;
  const auto& measure = profile.measure;
  const std::size_t count = x.size();

  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t i = 0; i < count;) {
    if (rho[i] > threshold) {
      std::size_t j = i;
      while (j + 1 < count && rho[j + 1] > threshold) ++j;
      runs.emplace_back(i, j);
      i = j + 1;
    } else {
      ++i;
    }
  }
  if (runs.empty()) throw InvalidArgument("support_intervals: density is below threshold everywhere");

  SupportProfile support;
  for (const auto& [i0, i1] : runs) {
    const double lo = i0 == 0 ? x[0]
                              : detail::refine_edge(measure, x[i0], x[i0 - 1], threshold, profile.eta_floor, 1e-8);
    const double hi = i1 + 1 == count
                          ? x[count - 1]
                          : detail::refine_edge(measure, x[i1], x[i1 + 1], threshold, profile.eta_floor, 1e-8);
    support.intervals.push_back({lo, hi});
  }

  // Interior dips: grid local minima well below the run maximum.
  for (const auto& [i0, i1] : runs) {
    double peak = 0.0;
    for (std::size_t i = i0; i <= i1; ++i) peak = std::max(peak, rho[i]);
    for (std::size_t i = i0 + 1; i + 1 <= i1; ++i) {
      if (rho[i] <= rho[i - 1] && rho[i] <= rho[i + 1] && rho[i] < 0.2 * peak) {
        if (auto zero = detail::interior_zero(measure, x[i - 1], x[i + 1])) {
          support.condition_a = false;
          support.interior_zeros.push_back(*zero);
        }
      }
    }
  }
  // Adjacent runs separated by a single sub-threshold grid point touch.
  for (std::size_t j = 1; j < runs.size(); ++j) {
    if (runs[j].first == runs[j - 1].second + 2) {
      const double gap = support.intervals[j].lo - support.intervals[j - 1].hi;
      if (gap < 1e-6) {
        support.condition_a = false;
        support.interior_zeros.push_back(0.5 * (support.intervals[j].lo + support.intervals[j - 1].hi));
      }
    }
  }

  support.quantiles.push_back(0.0);
  double cumulative = 0.0;
  for (std::size_t j = 0; j < runs.size(); ++j) {
    const auto [lo, hi] = support.intervals[j];
    std::vector<std::pair<double, double>> nodes{{lo, density_at(measure, lo, profile.eta_floor)}};
    for (std::size_t i = runs[j].first; i <= runs[j].second; ++i)
      if (x[i] > lo && x[i] < hi) nodes.emplace_back(x[i], rho[i]);
    nodes.emplace_back(hi, density_at(measure, hi, profile.eta_floor));
    double mass = 0.0;
    for (std::size_t k = 1; k < nodes.size(); ++k) {
      const auto [x0, y0] = nodes[k - 1];
      const auto [x1, y1] = nodes[k];
      const double mid = 0.5 * (x0 + x1);
      if (mid - lo < 0.05 || hi - mid < 0.05) {
        const double ym = density_at(measure, mid, profile.eta_floor);
        mass += 0.25 * (y0 + 2.0 * ym + y1) * (x1 - x0);
      } else {
        mass += 0.5 * (y0 + y1) * (x1 - x0);
      }
    }
    cumulative += mass;
    support.quantiles.push_back(cumulative);
  }
  return support;
}

struct IndexRange {
  int lo;  // 1-based, inclusive
  int hi;
  bool empty() const { return hi < lo; }
  int size() const { return empty() ? 0 : hi - lo + 1; }
};

struct BulkIndexSet {
  int n = 0;
  double epsilon = 0.0;
  std::vector<IndexRange> ranges;  // one per support interval, possibly empty
  bool all_empty() const {
    return std::all_of(ranges.begin(), ranges.end(), [](const IndexRange& r) { return r.empty(); });
  }
  bool contains(int i) const {
    return std::any_of(ranges.begin(), ranges.end(), [&](const IndexRange& r) { return i >= r.lo && i <= r.hi; });
  }
  /// All bulk indices in increasing order (1-based).
  std::vector<int> indices() const {
    std::vector<int> out;
    for (const auto& r : ranges)
      for (int i = r.lo; i <= r.hi; ++i) out.push_back(i);
    return out;
  }
};

/// Indices i with (s_{j-1} + eps) n <= i <= (s_j - eps) n, rounded inward.
/// When every range is empty the result is still returned; callers check
/// `all_empty()` and warn.
inline BulkIndexSet bulk_indices(const SupportProfile& support, double epsilon, int n) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw InvalidArgument("bulk_indices: epsilon must lie in (0, 1/2)");
  if (n < 1) throw InvalidArgument("bulk_indices: n must be positive");
  BulkIndexSet bulk{n, epsilon, {}};
  for (std::size_t j = 1; j < support.quantiles.size(); ++j) {
    const double lo = (support.quantiles[j - 1] + epsilon) * n;
    const double hi = (support.quantiles[j] - epsilon) * n;
    IndexRange r{static_cast<int>(std::ceil(lo - 1e-9)), static_cast<int>(std::floor(hi + 1e-9))};
    r.lo = std::max(r.lo, 1);
    r.hi = std::min(r.hi, n);
    if (epsilon >= 0.5 * (support.quantiles[j] - support.quantiles[j - 1])) r = {1, 0};
    bulk.ranges.push_back(r);
  }
  return bulk;
}

// ---------------------------------------------------------------------------
// Probes of the solution map z -> m(z)

struct UniquenessProbe {
  std::vector<cplx> roots;
  double spread = 0.0;  // max distance from the continuation solution
};

/// Damped Newton from `starts` random upper-half-plane points; all should
/// land on the continuation solution.
inline UniquenessProbe uniqueness_probe(const AtomicMeasure& measure, cplx z, int starts, std::uint64_t seed) {
  const auto reference = solve_pastur(measure, z).m;
  CounterStream rng(seed, 0x0111u);
  UniquenessProbe probe;
  for (int k = 0; k < starts; ++k) {
    const cplx start{rng.uniform(-5.0, 5.0), rng.uniform(1e-3, 5.0)};
    const auto sol = newton_from(measure, z, start);
    probe.roots.push_back(sol.m);
    probe.spread = std::max(probe.spread, std::abs(sol.m - reference));
  }
  return probe;
}

struct HolderFit {
  double exponent = 0.0;  // log-log slope of the increment envelope
  double constant = 0.0;  // max |m(z) - m(z')| / |z - z'|^(1/3) over all pairs
  std::vector<double> scales;
  std::vector<double> envelope;
};

/// Samples base points with |z| <= radius and Im z >= min_imag (half of them
/// near the support edges), perturbs each at log-spaced distances, and fits
/// log(max increment) against log(distance).
inline HolderFit holder_fit(const AtomicMeasure& measure, const std::vector<double>& edges, int base_points,
                            std::uint64_t seed, double radius = 5.0, double min_imag = 1e-4) {
  CounterStream rng(seed, 0x401du);
  std::vector<cplx> bases;
  for (int k = 0; k < base_points; ++k) {
    double re = 0.0;
    if (!edges.empty() && k % 2 == 0) {
      re = edges[static_cast<std::size_t>(k / 2) % edges.size()] + rng.uniform(-1e-3, 1e-3);
    } else {
      re = rng.uniform(-radius * 0.9, radius * 0.9);
    }
    const double im = min_imag * std::pow(10.0, rng.uniform(0.0, 2.0));
    bases.emplace_back(re, im);
  }
  HolderFit fit;
  for (double e = -7.0; e <= -1.0 + 1e-12; e += 0.5) fit.scales.push_back(std::pow(10.0, e));
  fit.envelope.assign(fit.scales.size(), 0.0);
  for (const auto& z : bases) {
    const cplx m = solve_pastur(measure, z).m;
    for (std::size_t s = 0; s < fit.scales.size(); ++s) {
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      cplx z2 = z + fit.scales[s] * cplx{std::cos(angle), std::sin(angle)};
      if (z2.imag() < min_imag) z2.imag(2.0 * min_imag - z2.imag());
      if (std::abs(z2) > radius) continue;
      const double dz = std::abs(z2 - z);
      const double dm = std::abs(solve_pastur(measure, z2).m - m);
      fit.envelope[s] = std::max(fit.envelope[s], dm);
      fit.constant = std::max(fit.constant, dm / std::cbrt(dz));
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t s = 0; s < fit.scales.size(); ++s) {
    if (fit.envelope[s] <= 0.0) continue;
    const double lx = std::log(fit.scales[s]);
    const double ly = std::log(fit.envelope[s]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  fit.exponent = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return fit;
}

}  // namespace dwl
