#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dwl/error.hpp"

namespace dwl {

/// Polynomial with complex coefficients, c[k] multiplies x^k.
class Polynomial {
 public:
  using cplx = std::complex<double>;

  Polynomial() : c_{cplx{0.0}} {}
  explicit Polynomial(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
  }

  /// x - root
  static Polynomial linear(cplx root) { return Polynomial({-root, cplx{1.0}}); }

  std::size_t degree() const { return c_.size() - 1; }
  const std::vector<cplx>& coefficients() const { return c_; }
  cplx operator[](std::size_t k) const { return k < c_.size() ? c_[k] : cplx{0.0}; }

  cplx operator()(cplx x) const {
    cplx acc{0.0};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  friend Polynomial operator*(const Polynomial& p, const Polynomial& q) {
    std::vector<cplx> r(p.c_.size() + q.c_.size() - 1, cplx{0.0});
    for (std::size_t i = 0; i < p.c_.size(); ++i)
      for (std::size_t j = 0; j < q.c_.size(); ++j) r[i + j] += p.c_[i] * q.c_[j];
    return Polynomial(std::move(r));
  }

  friend Polynomial operator*(cplx s, Polynomial p) {
    for (auto& x : p.c_) x *= s;
    return p;
  }

  friend Polynomial operator+(const Polynomial& p, const Polynomial& q) {
    std::vector<cplx> r(std::max(p.c_.size(), q.c_.size()), cplx{0.0});
    for (std::size_t i = 0; i < p.c_.size(); ++i) r[i] += p.c_[i];
    for (std::size_t i = 0; i < q.c_.size(); ++i) r[i] += q.c_[i];
    return Polynomial(std::move(r));
  }

  friend Polynomial operator-(const Polynomial& p, const Polynomial& q) {
    return p + cplx{-1.0} * q;
  }

 private:
  std::vector<cplx> c_;
};

/// All roots of p, as eigenvalues of the companion matrix of the monic
/// normalization. The leading coefficient must be nonzero.
inline std::vector<std::complex<double>> polynomial_roots(const Polynomial& p) {
  const std::size_t d = p.degree();
  const auto lead = p[d];
  if (lead == std::complex<double>{0.0}) throw InvalidArgument("polynomial_roots: zero leading coefficient");
  if (d == 0) return {};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 1; i < d; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  for (std::size_t i = 0; i < d; ++i)
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d - 1)) = -p[i] / lead;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw SolverError("companion eigenvalue solve failed", 0.0);
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace dwl
