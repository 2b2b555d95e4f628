#pragma once

// Closed-form references for the two-atom source (1/2) delta_{-a} + (1/2) delta_{a}
// and for the sine kernel.
//
// For this source w = z + m(z) is the inverse of
//
//     z(xi) = (xi^3 - (a^2 - 1) xi) / (xi^2 - a^2),
//
// on the branch xi_1(z) ~ z at infinity, so rho(x) = Im xi_1(x + i0) / pi.
// For a > 1 the density lives on [-alpha, -beta] and [beta, alpha], whose
// edges are the critical values of z(xi).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dwl/error.hpp"
#include "dwl/polynomial.hpp"

namespace dwl {

struct BkParameters {
  double a = 0.0;
  double alpha = 0.0;  // outer edge
  double beta = 0.0;   // inner edge
  double xi_alpha = 0.0;  // real critical point mapping to alpha
  double xi_beta = 0.0;   // real critical point mapping to beta
};

/// xi^3 - z xi^2 - (a^2 - 1) xi + a^2 z, i.e. the inverse relation cleared of
/// its denominator.
inline Polynomial bk_cubic(std::complex<double> z, double a) {
  const double a2 = a * a;
  return Polynomial({a2 * z, std::complex<double>{-(a2 - 1.0)}, -z, std::complex<double>{1.0}});
}

/// z(xi) for the two-atom source.
inline std::complex<double> bk_map(std::complex<double> xi, double a) {
  return (xi * xi * xi - (a * a - 1.0) * xi) / (xi * xi - a * a);
}

inline constexpr double kBkRealOffset = 1e-8;

/// The branch xi_1 with xi_1(z) ~ z at infinity, tracked down from
/// Re z + i T (T = 1000 (1 + a)) by halving Im z and keeping the root nearest
/// to the previous one. A real z is evaluated at z + i 1e-8.
inline std::complex<double> bk_xi1(std::complex<double> z, double a) {
  if (!(a > 0.0)) throw InvalidArgument("bk_xi1: a must be positive");
  if (z.imag() < 0.0) throw InvalidArgument("bk_xi1: z must lie in the closed upper half-plane");
  if (z.imag() == 0.0) z.imag(kBkRealOffset);
  const double top = 1e3 * (1.0 + a);
  std::vector<double> heights;
  for (double eta = std::max(top, z.imag()); eta > z.imag(); eta *= 0.5) heights.push_back(eta);
  heights.push_back(z.imag());

  std::complex<double> xi{z.real(), heights.front()};
  for (double eta : heights) {
    const std::complex<double> zz{z.real(), eta};
    const auto roots = polynomial_roots(bk_cubic(zz, a));
    auto best = std::min_element(roots.begin(), roots.end(), [&](const auto& p, const auto& q) {
      return std::abs(p - xi) < std::abs(q - xi);
    });
    xi = *best;
    if (xi.imag() < -1e-9) throw SolverError("bk_xi1: branch left the upper half-plane", std::abs(xi.imag()));
  }
  return xi;
}

/// rho(x) = Im xi_{1+}(x) / pi for a > 1. Exactly zero where the real cubic
/// has three real roots (outside the support).
inline double bk_density(double x, double a) {
  if (!(a > 1.0)) throw InvalidArgument("bk_density: requires a > 1");
  const auto tracked = bk_xi1({x, 0.0}, a);
  // Snap to the boundary value: the root of the real-axis cubic nearest the
  // tracked branch.
  const auto roots = polynomial_roots(bk_cubic({x, 0.0}, a));
  auto best = std::min_element(roots.begin(), roots.end(), [&](const auto& p, const auto& q) {
    return std::abs(p - tracked) < std::abs(q - tracked);
  });
  const double im = std::abs(best->imag());
  if (im <= 1e-12 * (1.0 + std::abs(*best))) return 0.0;
  return im / std::numbers::pi;
}

/// Support edges for a > 1: critical points solve
/// xi^4 - (2 a^2 + 1) xi^2 + a^2 (a^2 - 1) = 0; alpha and beta are their images.
inline BkParameters bk_support(double a) {
  if (a == 1.0) throw InvalidArgument("bk_support: a = 1 is the critical case (condition (A) fails)");
  if (!(a > 1.0)) throw InvalidArgument("bk_support: single-interval regime for 0 < a < 1");
  const double a2 = a * a;
  const auto roots = polynomial_roots(Polynomial(
      {std::complex<double>{a2 * (a2 - 1.0)}, 0.0, std::complex<double>{-(2.0 * a2 + 1.0)}, 0.0, 1.0}));
  std::vector<double> positive;
  for (const auto& r : roots)
    if (std::abs(r.imag()) <= 1e-9 * (1.0 + std::abs(r)) && r.real() > 0.0) positive.push_back(r.real());
  if (positive.size() != 2) throw SolverError("bk_support: expected two positive critical points", 0.0);
  std::sort(positive.begin(), positive.end());
  BkParameters p;
  p.a = a;
  p.xi_beta = positive[0];
  p.xi_alpha = positive[1];
  p.beta = bk_map(p.xi_beta, a).real();
  p.alpha = bk_map(p.xi_alpha, a).real();
  return p;
}

/// sin(pi (u - v)) / (pi (u - v)), equal to 1 on the diagonal.
inline double sine_kernel(double u, double v) {
  const double t = std::numbers::pi * (u - v);
  if (std::abs(t) < 1e-8) return 1.0 - t * t / 6.0;
  return std::sin(t) / t;
}

/// det(K(u_i, u_j)), the k-point correlation of the sine process.
inline double sine_correlation(std::span<const double> points) {
  const auto k = static_cast<Eigen::Index>(points.size());
  if (k == 0) return 1.0;
  Eigen::MatrixXd kernel(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) kernel(i, j) = sine_kernel(points[i], points[j]);
  return std::max(0.0, kernel.fullPivLu().determinant());
}

inline double sine_correlation(std::initializer_list<double> points) {
  return sine_correlation(std::span<const double>(points.begin(), points.size()));
}

}  // namespace dwl
