#pragma once

// Wigner matrices with external source, W = M / sqrt(n) + D, and the dense
// Hermitian eigendecomposition contract used by every statistic.
//
// Entry (i, j) of trial t is generated from Philox counter (i, j, t, tag)
// under the ensemble seed, so a realization depends only on (seed, trial)
// and never on the order in which trials are run.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "dwl/error.hpp"
#include "dwl/measure.hpp"
#include "dwl/rng.hpp"

namespace dwl {

enum class Symmetry { RealSymmetric, Hermitian };

inline std::string to_string(Symmetry s) { return s == Symmetry::RealSymmetric ? "real-symmetric" : "hermitian"; }

struct EnsembleSpec {
  int n = 0;
  EntryDistribution entry_law = EntryDistribution::gaussian_complex();
  EntryDistribution diagonal_law = entry_law;  // only its shape and variance are used
  Symmetry symmetry = Symmetry::Hermitian;
  bool truncate = false;
  double truncation_exponent = 1.0;  // clip at log^(C+1) n with this C
  std::uint64_t seed = 0;
  std::uint32_t trial_index = 0;

  /// Off-diagonal law with matching diagonal law and symmetry.
  static EnsembleSpec for_law(int n, const EntryDistribution& law, std::uint64_t seed, std::uint32_t trial = 0) {
    EnsembleSpec s;
    s.n = n;
    s.entry_law = law;
    s.diagonal_law = law;
    s.symmetry = law.is_complex() ? Symmetry::Hermitian : Symmetry::RealSymmetric;
    s.seed = seed;
    s.trial_index = trial;
    return s;
  }

  EnsembleSpec with_trial(std::uint32_t trial) const {
    EnsembleSpec s = *this;
    s.trial_index = trial;
    return s;
  }

  void validate() const {
    if (n < 1) throw InvalidArgument("ensemble size must be positive");
    if (symmetry == Symmetry::RealSymmetric && entry_law.is_complex())
      throw InvalidArgument("a real-symmetric ensemble needs a real entry law");
  }

  std::string describe() const {
    std::ostringstream out;
    out << "n=" << n << ";law=" << entry_law.name() << ";diag=" << diagonal_law.name()
        << ";sigma2=" << std::setprecision(17) << diagonal_law.diagonal_variance() << ";sym=" << to_string(symmetry)
        << ";truncate=" << truncate << ";C=" << truncation_exponent << ";seed=" << seed
        << ";trial=" << trial_index;
    return out.str();
  }
};

/// FNV-1a over a byte range, rendered as 16 hex digits.
inline std::string fnv1a_hex(const void* data, std::size_t bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

inline std::string digest(const EnsembleSpec& spec, const DiagonalRealization* diag = nullptr) {
  std::string text = spec.describe();
  if (diag) {
    std::ostringstream out;
    out << std::setprecision(17);
    for (double e : diag->entries) out << e << ',';
    text += ";D=" + out.str();
  }
  return fnv1a_hex(text.data(), text.size());
}

/// Dense Hermitian matrix stored as real-symmetric or complex.
class HermitianMatrix {
 public:
  HermitianMatrix() : data_(Eigen::MatrixXd()) {}
  explicit HermitianMatrix(Eigen::MatrixXd m) : data_(std::move(m)) {}
  explicit HermitianMatrix(Eigen::MatrixXcd m) : data_(std::move(m)) {}

  static HermitianMatrix zero(int n, Symmetry s = Symmetry::RealSymmetric) {
    if (s == Symmetry::RealSymmetric) return HermitianMatrix(Eigen::MatrixXd(Eigen::MatrixXd::Zero(n, n)));
    return HermitianMatrix(Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(n, n)));
  }

  static HermitianMatrix diagonal(const std::vector<double>& d) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
    return HermitianMatrix(std::move(m));
  }

  bool is_real() const { return std::holds_alternative<Eigen::MatrixXd>(data_); }
  int size() const {
    return static_cast<int>(std::visit([](const auto& m) { return m.rows(); }, data_));
  }

  const Eigen::MatrixXd& real() const { return std::get<Eigen::MatrixXd>(data_); }
  const Eigen::MatrixXcd& complex() const { return std::get<Eigen::MatrixXcd>(data_); }
  Eigen::MatrixXd& real() { return std::get<Eigen::MatrixXd>(data_); }
  Eigen::MatrixXcd& complex() { return std::get<Eigen::MatrixXcd>(data_); }

  Eigen::MatrixXcd to_complex() const {
    if (is_real()) return real().cast<cplx>();
    return complex();
  }

  cplx operator()(int i, int j) const {
    if (is_real()) return real()(i, j);
    return complex()(i, j);
  }

  double trace() const {
    return std::visit([](const auto& m) { return std::real(m.trace()); }, data_);
  }

  /// Largest |A_ij - conj(A_ji)|.
  double hermiticity_defect() const {
    return std::visit([](const auto& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }, data_);
  }

  double max_abs() const {
    return std::visit([](const auto& m) { return m.cwiseAbs().maxCoeff(); }, data_);
  }

  /// Frobenius norm, an upper bound for the spectral norm.
  double frobenius() const {
    return std::visit([](const auto& m) { return m.norm(); }, data_);
  }

  HermitianMatrix& operator*=(double s) {
    std::visit([s](auto& m) { m *= s; }, data_);
    return *this;
  }

  std::string digest() const {
    return std::visit(
        [](const auto& m) {
          return fnv1a_hex(m.data(), static_cast<std::size_t>(m.size()) * sizeof(typename std::decay_t<decltype(m)>::Scalar));
        },
        data_);
  }

  friend bool operator==(const HermitianMatrix& x, const HermitianMatrix& y) {
    if (x.is_real() != y.is_real() || x.size() != y.size()) return false;
    if (x.is_real()) return x.real() == y.real();
    return x.complex() == y.complex();
  }

 private:
  std::variant<Eigen::MatrixXd, Eigen::MatrixXcd> data_;
};

namespace detail {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr std::uint32_t kOffDiagonalTag = 0;
inline constexpr std::uint32_t kDiagonalTag = 1;

inline double matched4_value(double u) {
  if (u < 1.0 / 6.0) return std::sqrt(3.0);
  if (u < 1.0 / 3.0) return -std::sqrt(3.0);
  return 0.0;
}

inline double discrete_value(const EntryDistribution& law, double u) {
  const auto& pts = law.points();
  const auto& prob = law.probabilities();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    acc += prob[k];
    if (u < acc) return pts[k];
  }
  return pts.back();
}

/// Standardized real shape value for the diagonal of the given kind.
inline double diagonal_shape(const EntryDistribution& law, const CounterRng& rng, std::uint32_t i, std::uint32_t trial) {
  switch (law.kind()) {
    case EntryKind::GaussianReal:
    case EntryKind::GaussianComplex:
    case EntryKind::ShiftedComplex:
      return rng.normals(i, i, trial, kDiagonalTag).z0;
    case EntryKind::Rademacher:
      return (rng.raw(i, i, trial, kDiagonalTag)[0] & 1u) ? 1.0 : -1.0;
    case EntryKind::Matched4Real:
    case EntryKind::Matched4Complex:
      return matched4_value(rng.uniforms(i, i, trial, kDiagonalTag).u0);
    case EntryKind::Discrete:
      return discrete_value(law, rng.uniforms(i, i, trial, kDiagonalTag).u0);
  }
  return 0.0;
}

inline cplx offdiagonal(const EntryDistribution& law, const CounterRng& rng, std::uint32_t i, std::uint32_t j,
                        std::uint32_t trial) {
  switch (law.kind()) {
    case EntryKind::GaussianReal:
      return rng.normals(i, j, trial, kOffDiagonalTag).z0;
    case EntryKind::GaussianComplex: {
      const auto g = rng.normals(i, j, trial, kOffDiagonalTag);
      return cplx{g.z0, g.z1} * detail::kInvSqrt2;
    }
    case EntryKind::Rademacher:
      return (rng.raw(i, j, trial, kOffDiagonalTag)[0] & 1u) ? 1.0 : -1.0;
    case EntryKind::Matched4Real:
      return matched4_value(rng.uniforms(i, j, trial, kOffDiagonalTag).u0);
    case EntryKind::Matched4Complex: {
      const auto u = rng.uniforms(i, j, trial, kOffDiagonalTag);
      return cplx{matched4_value(u.u0), matched4_value(u.u1)} * detail::kInvSqrt2;
    }
    case EntryKind::Discrete:
      return discrete_value(law, rng.uniforms(i, j, trial, kOffDiagonalTag).u0);
    case EntryKind::ShiftedComplex: {
      const auto g = rng.normals(i, j, trial, kOffDiagonalTag);
      const double mu = law.shift();
      return mu + std::sqrt(1.0 - mu * mu) * cplx{g.z0, g.z1} * detail::kInvSqrt2;
    }
  }
  return 0.0;
}

/// Radial clip at `level`.
inline cplx clip(cplx v, double level) {
  const double r = std::abs(v);
  return r > level ? v * (level / r) : v;
}

/// Mean of the clipped law, known in closed form for the built-in kinds:
/// symmetric laws stay centered; discrete laws are summed exactly.
inline double clipped_mean(const EntryDistribution& law, double level, double scale) {
  if (law.kind() != EntryKind::Discrete) return 0.0;
  double mean = 0.0;
  for (std::size_t k = 0; k < law.points().size(); ++k) {
    const double v = scale * law.points()[k];
    mean += law.probabilities()[k] * std::clamp(v, -level, level);
  }
  return mean;
}

}  // namespace detail

inline double truncation_level(const EnsembleSpec& spec) {
  return std::pow(std::log(static_cast<double>(spec.n)), spec.truncation_exponent + 1.0);
}

/// The unscaled Wigner matrix M: independent upper-triangle entries from
/// the entry law, real diagonal from the diagonal law, mirrored below.
inline HermitianMatrix sample_wigner(const EnsembleSpec& spec) {
  spec.validate();
  const CounterRng rng(spec.seed);
  const int n = spec.n;
  const std::uint32_t trial = spec.trial_index;
  const double sigma = std::sqrt(spec.diagonal_law.diagonal_variance());
  const double level = spec.truncate ? truncation_level(spec) : std::numeric_limits<double>::infinity();
  const double off_shift = spec.truncate ? detail::clipped_mean(spec.entry_law, level, 1.0) : 0.0;
  const double diag_shift = spec.truncate ? detail::clipped_mean(spec.diagonal_law, level, sigma) : 0.0;

  auto diag_value = [&](int i) {
    const auto u = static_cast<std::uint32_t>(i);
    double v = sigma * detail::diagonal_shape(spec.diagonal_law, rng, u, trial);
    if (spec.truncate) v = std::clamp(v, -level, level) - diag_shift;
    return v;
  };
  auto off_value = [&](int i, int j) {
    cplx v = detail::offdiagonal(spec.entry_law, rng, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), trial);
    if (spec.truncate) v = detail::clip(v, level) - off_shift;
    return v;
  };

  if (spec.symmetry == Symmetry::RealSymmetric) {
    Eigen::MatrixXd m(n, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < j; ++i) {
        const double v = off_value(i, j).real();
        m(i, j) = v;
        m(j, i) = v;
      }
      m(j, j) = diag_value(j);
    }
    return HermitianMatrix(std::move(m));
  }
  Eigen::MatrixXcd m(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const cplx v = off_value(i, j);
      m(i, j) = v;
      m(j, i) = std::conj(v);
    }
    m(j, j) = diag_value(j);
  }
  return HermitianMatrix(std::move(m));
}

/// W = M / sqrt(n) + D.
inline HermitianMatrix assemble(const HermitianMatrix& wigner, const DiagonalRealization& diag) {
  const int n = wigner.size();
  if (diag.n != n || static_cast<int>(diag.entries.size()) != n)
    throw InvalidArgument("assemble: diagonal has size " + std::to_string(diag.n) + ", matrix has " +
                          std::to_string(n));
  HermitianMatrix w = wigner;
  w *= 1.0 / std::sqrt(static_cast<double>(n));
  if (w.is_real()) {
    for (int i = 0; i < n; ++i) w.real()(i, i) += diag.entries[static_cast<std::size_t>(i)];
  } else {
    for (int i = 0; i < n; ++i) w.complex()(i, i) += diag.entries[static_cast<std::size_t>(i)];
  }
  return w;
}

inline HermitianMatrix assemble(const EnsembleSpec& spec, const DiagonalRealization& diag) {
  if (diag.n != spec.n) throw InvalidArgument("assemble: diagonal size does not match the ensemble");
  return assemble(sample_wigner(spec), diag);
}

struct SpectralSample {
  std::vector<double> eigenvalues;             // ascending
  std::optional<Eigen::MatrixXcd> eigenvectors;  // column k belongs to eigenvalues[k]
  std::string provenance;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

namespace detail {

inline void check_info(lapack_int info, const HermitianMatrix& w) {
  if (info != 0)
    throw BackendError("eigensolver failed (info " + std::to_string(info) + ") on matrix " + w.digest());
}

}  // namespace detail

/// Sorted eigenvalues and, if requested, orthonormal eigenvectors.
/// Eigenvalues alone come from ?syevd / ?heev; eigenvectors from the MRRR
/// drivers ?syevr / ?heevr.
inline SpectralSample eigendecompose(const HermitianMatrix& w, bool want_vectors) {
  const int n = w.size();
  SpectralSample out;
  if (n == 0) return out;
  const double scale = std::max(1.0, w.max_abs());
  if (w.hermiticity_defect() > 1e-12 * scale) throw InvalidArgument("eigendecompose: matrix is not Hermitian");

  out.eigenvalues.resize(static_cast<std::size_t>(n));
  if (!want_vectors) {
    lapack_int info = 0;
    if (w.is_real()) {
      Eigen::MatrixXd a = w.real();
      info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, a.data(), n, out.eigenvalues.data());
    } else {
      Eigen::MatrixXcd a = w.complex();
      info = LAPACKE_zheev(LAPACK_COL_MAJOR, 'N', 'U', n, reinterpret_cast<lapack_complex_double*>(a.data()), n,
                           out.eigenvalues.data());
    }
    detail::check_info(info, w);
    return out;
  }

  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  if (w.is_real()) {
    Eigen::MatrixXd a = w.real();
    Eigen::MatrixXd z(n, n);
    const lapack_int info =
        LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', n, a.data(), n, 0.0, 0.0, 0, 0, 0.0, &found,
                       out.eigenvalues.data(), z.data(), n, support.data());
    detail::check_info(info, w);
    out.eigenvectors = z.cast<cplx>();
  } else {
    Eigen::MatrixXcd a = w.complex();
    Eigen::MatrixXcd z(n, n);
    const lapack_int info = LAPACKE_zheevr(
        LAPACK_COL_MAJOR, 'V', 'A', 'U', n, reinterpret_cast<lapack_complex_double*>(a.data()), n, 0.0, 0.0, 0, 0,
        0.0, &found, out.eigenvalues.data(), reinterpret_cast<lapack_complex_double*>(z.data()), n, support.data());
    detail::check_info(info, w);
    out.eigenvectors = std::move(z);
  }
  if (found != n) throw BackendError("eigensolver returned " + std::to_string(found) + " of " + std::to_string(n) +
                                     " eigenpairs for matrix " + w.digest());
  return out;
}

/// Removes row and column `drop_index` (1-based).
inline HermitianMatrix principal_minor(const HermitianMatrix& w, int drop_index) {
  const int n = w.size();
  if (drop_index < 1 || drop_index > n)
    throw InvalidArgument("principal_minor: index " + std::to_string(drop_index) + " outside [1, " +
                          std::to_string(n) + "]");
  const int k = drop_index - 1;
  auto cut = [&](const auto& m) {
    using M = std::decay_t<decltype(m)>;
    M r(n - 1, n - 1);
    for (int j = 0, jj = 0; j < n; ++j) {
      if (j == k) continue;
      for (int i = 0, ii = 0; i < n; ++i) {
        if (i == k) continue;
        r(ii++, jj) = m(i, j);
      }
      ++jj;
    }
    return r;
  };
  if (w.is_real()) return HermitianMatrix(cut(w.real()));
  return HermitianMatrix(cut(w.complex()));
}

}  // namespace dwl
